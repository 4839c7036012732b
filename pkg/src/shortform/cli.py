"""Headless driver: ingest, generate, and render in one command.

``shortform run`` reproduces the three comparison conditions (abstractive,
extractive, mixed) for fixtures and CI; ``shortform serve`` hosts the editing
API; ``shortform make-fixture`` writes the bundled synthetic fixtures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import fixtures, pipeline, renderer
from .blender import BlendConfig
from .config import PipelineConfig, load_provider_config_file, normalize_weights
from .errors import ShortformError
from .ingest import ingest_video
from .matcher import MatchConfig
from .pipeline import MODES
from .project_store import ProjectStore
from .providers import ProviderConfig, build_providers


def _provider_config(args) -> ProviderConfig:
    data = {}
    if args.provider_config:
        data = load_provider_config_file(args.provider_config)
    kind = data.get("kind", "fake")
    seed = args.seed if args.seed is not None else data.get("seed", 0)
    return ProviderConfig(
        provider_kind=kind,
        endpoint=data.get("endpoint"),
        credentials_env=data.get("credentials_env", "SHORTFORM_API_KEY"),
        seed=seed,
        timeout_s=float(data.get("timeout_s", 30.0)),
        max_retries=int(data.get("max_retries", 2)),
    )


def _parse_weights(raw: str | None):
    if raw is None:
        return None
    parts = [float(x) for x in raw.split(",")]
    if len(parts) != 4:
        raise SystemExit("--weights takes exactly four comma-separated values")
    return normalize_weights(tuple(parts))


def cmd_run(args) -> int:
    stage = "setup"
    try:
        if not os.path.exists(args.video):
            raise ShortformError(f"no such video: {args.video}")
        weights = _parse_weights(args.weights)
        cfg = PipelineConfig(word_budget=args.word_budget)
        match_cfg = MatchConfig(weights=weights) if weights else MatchConfig()
        blend_cfg = BlendConfig(
            threshold=args.blend_threshold if args.blend_threshold is not None else 0.08,
            weights=weights or BlendConfig().weights,
        )
        pcfg = _provider_config(args)
        providers = build_providers(pcfg, short_words_target=int(cfg.word_budget * 0.9))

        os.makedirs(args.out, exist_ok=True)
        store = ProjectStore(os.path.join(args.out, "store"))
        stages_s = {}
        t_total = time.perf_counter()

        stage = "ingest"
        t0 = time.perf_counter()
        project = ingest_video(args.video, providers, store)
        stages_s["ingest"] = round(time.perf_counter() - t0, 3)
        print(f"[ingest] {len(project.clips)} clips, {len(project.words)} words")

        stage = "generate"
        t0 = time.perf_counter()
        result = pipeline.generate(
            project, store, providers, cfg, match_cfg, blend_cfg, mode=args.mode
        )
        project = result.project
        project.revision += 1
        store.save(project)
        store.append_event(
            project.project_id, "generate", {"mode": args.mode, "guide_clip_ids": []}, project.revision
        )
        stages_s["generate"] = round(time.perf_counter() - t0, 3)
        print(f"[generate] mode={args.mode}, {len(project.timeline)} timeline entries")

        stage = "render"
        t0 = time.perf_counter()
        render_result = renderer.render(
            project, store, providers, renderer.RenderConfig(), preset=args.preset
        )
        stages_s["render"] = round(time.perf_counter() - t0, 3)
        print(
            f"[render] {render_result.total_duration_s:.1f} s output -> {render_result.edl_path}"
        )

        if result.score_table_tsv:
            with open(os.path.join(args.out, "score_table.tsv"), "w", encoding="utf-8") as f:
                f.write(result.score_table_tsv)
        if result.blend_report:
            with open(os.path.join(args.out, "blend_report.txt"), "w", encoding="utf-8") as f:
                f.write(result.blend_report.to_text())

        manifest = {
            "input": os.path.abspath(args.video),
            "mode": args.mode,
            "provider": {"kind": pcfg.provider_kind, "seed": pcfg.seed},
            "config": {
                "word_budget": cfg.word_budget,
                "weights": list(match_cfg.weights),
                "blend_threshold": blend_cfg.threshold,
                "preset": args.preset,
            },
            "outputs": {
                "project_dir": store.project_dir(project.project_id),
                "edl": render_result.edl_path,
                "audio": render_result.audio_path,
                "video": render_result.video_path,
            },
            "stages_s": stages_s,
            "total_s": round(time.perf_counter() - t_total, 3),
        }
        with open(os.path.join(args.out, "manifest.json"), "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
        return 0
    except ShortformError as exc:
        print(f"error at stage {stage}: {exc}", file=sys.stderr)
        return 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.store, provider_config=_provider_config(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_make_fixture(args) -> int:
    if args.tiny:
        path = fixtures.build_tiny(args.out, args.name)
    else:
        path = fixtures.build_house_tour(args.out, args.name)
    print(path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="shortform")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="ingest, generate, and render one video")
    run.add_argument("video")
    run.add_argument("--mode", choices=MODES, default="abstractive")
    run.add_argument("--out", required=True)
    run.add_argument("--weights", help="w1,w2,w3,w4 (normalized to the simplex)")
    run.add_argument("--blend-threshold", type=float, default=None)
    run.add_argument("--word-budget", type=int, default=PipelineConfig().word_budget)
    run.add_argument("--provider-config", help="key-value JSON provider config")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--preset", choices=("full", "draft"), default="full")
    run.set_defaults(fn=cmd_run)

    serve = sub.add_parser("serve", help="run the editing service")
    serve.add_argument("--store", default="./projects")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8008)
    serve.add_argument("--provider-config")
    serve.add_argument("--seed", type=int, default=None)
    serve.set_defaults(fn=cmd_serve)

    fixture = sub.add_parser("make-fixture", help="write a synthetic fixture video")
    fixture.add_argument("--out", required=True)
    fixture.add_argument("--name", default="tour")
    fixture.add_argument("--tiny", action="store_true")
    fixture.set_defaults(fn=cmd_make_fixture)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
