"""Fixture and Configuration Operations."""

from typing import Dict, Optional

import structlog

from ..config.settings import Settings
from ..processors.synthetic import generate_fixture

logger = structlog.get_logger(__name__)


def run_synth_fixture(
    settings: Settings,
    out_dir: str,
    seed: Optional[int] = None,
    train_docs: int = 200,
    test_docs: int = 50,
) -> Dict:
    """Execute synth-fixture operation.

    Writes a small synthetic KB, surface forms, lexicons, train/test corpora
    in raw markup and a matching config.ini. Seeded, so reruns are identical.
    """
    seed = settings.runtime.seed if seed is None else seed
    logger.info("synth_fixture_started", out_dir=out_dir, seed=seed)
    summary = generate_fixture(out_dir, seed=seed, train_docs=train_docs, test_docs=test_docs)
    result = {"success": True, "seed": seed, **summary}
    logger.info("synth_fixture_completed", **result)
    return result


def flatten_settings(settings: Settings) -> Dict[str, object]:
    """``section.key`` → value for every effective setting."""
    flat: Dict[str, object] = {}
    for section, values in settings.model_dump(mode="json").items():
        for key, value in values.items():
            flat[f"{section}.{key}"] = value
    return flat


def run_validate_config(settings: Settings) -> Dict:
    """Execute validate-config operation: report the effective settings.

    Loading already validated every value; this only flattens them.
    """
    flat = flatten_settings(settings)
    logger.info("validate_config_completed", settings=len(flat))
    return {"success": True, "settings": flat}
