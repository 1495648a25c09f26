"""Command-line client for the align / augment / score services.

Each subcommand builds a request model and either POSTs it to a running
server (``--server`` or SEGKIT_SERVER) or invokes the same handler
in-process, so local use needs no daemon. Exit codes: 0 success, 1 fatal
input error, 2 partial success (rejects were written).

Flags can also be set through SEGKIT_<COMMAND>_<FLAG> environment
variables, e.g. SEGKIT_ALIGN_PAD_FRAMES=8.
"""

from __future__ import annotations

import json
import sys

import click
import httpx
from pydantic import BaseModel

from .errors import SegkitError
from .pipeline import format_report
from .service import handlers
from .service.schemas import (
    AlignRequest,
    AugmentRequest,
    GeometryParams,
    ScoreRequest,
)


def _call(server: str | None, endpoint: str, request: BaseModel, local_handler) -> dict:
    """Send the request to a remote server or run the handler in-process."""
    if server:
        url = server.rstrip("/") + "/v1/" + endpoint
        try:
            resp = httpx.post(url, json=request.model_dump(mode="json"), timeout=None)
        except httpx.HTTPError as e:
            click.echo(f"error: cannot reach {url}: {e}", err=True)
            sys.exit(1)
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            click.echo(f"error: {detail}", err=True)
            sys.exit(1)
        return resp.json()
    try:
        return local_handler(request).model_dump(by_alias=True, exclude_none=True)
    except SegkitError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


@click.group(context_settings={"auto_envvar_prefix": "SEGKIT"})
@click.option("--server", envvar="SEGKIT_SERVER", default=None,
              help="Base URL of a running segkit server; default runs in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """CTC word alignment, segment augmentation, and WER scoring."""
    ctx.obj = {"server": server}


@main.command()
@click.option("--manifest", required=True, help="Input JSONL manifest.")
@click.option("--posteriors", required=True, help="Directory of <id>.ctcp grids.")
@click.option("--vocab", required=True, help="Vocab JSON file.")
@click.option("--out", required=True, help="Output manifest path.")
@click.option("--pad-frames", default=5, show_default=True,
              help="Frames of edge padding for the first/last word.")
@click.option("--paper-literal-backtrack", is_flag=True, default=False,
              help="Start backtrack at the unconstrained argmax state.")
@click.option("--frame-shift-ms", default=10.0, show_default=True)
@click.option("--subsample-factor", default=4, show_default=True)
@click.option("--sample-rate", default=16000, show_default=True)
@click.pass_context
def align(ctx, manifest, posteriors, vocab, out, pad_frames,
          paper_literal_backtrack, frame_shift_ms, subsample_factor, sample_rate):
    """Attach refined word segments to a manifest."""
    req = AlignRequest(
        manifest=manifest,
        posteriors=posteriors,
        vocab=vocab,
        out=out,
        pad_frames=pad_frames,
        paper_literal_backtrack=paper_literal_backtrack,
        geometry=GeometryParams(
            frame_shift_ms=frame_shift_ms,
            subsample_factor=subsample_factor,
            sample_rate_hz=sample_rate,
        ),
    )
    resp = _call(ctx.obj["server"], "align", req, handlers.do_align)
    click.echo(f"aligned {resp['aligned']} entries -> {resp['out_manifest']}")
    if resp["rejected"]:
        click.echo(f"rejected {resp['rejected']} entries -> {resp['rejects_path']}", err=True)
        sys.exit(2)


@main.command()
@click.option("--manifest", required=True, help="Input manifest with segments.")
@click.option("--out-dir", required=True, help="Output directory for WAVs + manifest.")
@click.option("--seed", default=0, show_default=True, help="Master seed.")
@click.option("--apply-prob", default=0.5, show_default=True)
@click.option("--independent-prob", default=0.75, show_default=True)
@click.option("--augmenter-probs", default="0.1,0.6,0.3", show_default=True,
              help="Comma-separated weights for crop,permute,drop.")
@click.option("--shuffle-buffer", default=64, show_default=True)
@click.option("--no-emit-originals", is_flag=True, default=False,
              help="Write only augmented utterances.")
@click.pass_context
def augment(ctx, manifest, out_dir, seed, apply_prob, independent_prob,
            augmenter_probs, shuffle_buffer, no_emit_originals):
    """Generate augmented audio-text pairs from a segmented manifest."""
    try:
        probs = tuple(float(p) for p in augmenter_probs.split(","))
        if len(probs) != 3:
            raise ValueError
    except ValueError:
        click.echo("error: --augmenter-probs wants three comma-separated numbers", err=True)
        sys.exit(1)
    req = AugmentRequest(
        manifest=manifest,
        out_dir=out_dir,
        seed=seed,
        apply_prob=apply_prob,
        independent_prob=independent_prob,
        augmenter_probs=probs,
        shuffle_buffer=shuffle_buffer,
        emit_originals=not no_emit_originals,
    )
    resp = _call(ctx.obj["server"], "augment", req, handlers.do_augment)
    click.echo(
        f"read {resp['entries_in']} entries; wrote {resp['originals']} originals "
        f"+ {resp['augmented']} augmented -> {resp['out_manifest']}"
    )


@main.command()
@click.option("--ref", required=True, help="Reference manifest.")
@click.option("--hyp", required=True, help="Hypothesis manifest.")
@click.option("--baseline", default=None, help="Baseline hypothesis manifest for paired rWERR.")
@click.option("--bootstrap", is_flag=True, default=False, help="Compute percentile CIs.")
@click.option("--B", "num_replicates", default=5000, show_default=True,
              help="Bootstrap replicate count.")
@click.option("--alpha", default=0.05, show_default=True, help="Significance level.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, help="Also write the JSON report here.")
@click.pass_context
def score(ctx, ref, hyp, baseline, bootstrap, num_replicates, alpha, seed, out):
    """Report WER with SUB/DEL/INS decomposition (plus optional CIs)."""
    req = ScoreRequest(
        ref=ref,
        hyp=hyp,
        baseline=baseline,
        bootstrap=bootstrap,
        num_replicates=num_replicates,
        alpha=alpha,
        seed=seed,
    )
    report = _call(ctx.obj["server"], "score", req, handlers.do_score)
    click.echo(format_report(report))
    if out:
        with open(out, "w", encoding="utf-8") as f:
            json.dump(report, f, ensure_ascii=False, indent=2)
            f.write("\n")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8571, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
