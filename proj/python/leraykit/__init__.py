import json

from ._leraykit import (
    ConfigError,
    NumericalError,
    ParseError,
    Surface,
    area,
    cauchy_norm,
    circle,
    custom_graph,
    dual_point,
    efficiency,
    ellipse,
    invariants,
    leray_norm,
    lp_sphere,
    mobius_image,
    power_graph,
    rigid_residual_max,
    roundtrip_error,
    sigma3,
    sphere,
    surface_from_config,
    transfer_residuals,
    tube,
)
from ._leraykit import run_config as _run_config


def run(config):
    """Run an experiment config (dict or JSON text); returns (report dict, csv text, pass flag)."""
    text = config if isinstance(config, str) else json.dumps(config)
    out = _run_config(text)
    return json.loads(out["json"]), out["csv"], out["pass"]
