"""File formats: VF1 velocity containers, SM1 model checkpoints, CSV tables.

A VF1 image is a JSON header (``name.vf1``) plus a raw little-endian
float32 payload (``name.vf1.bin``) in row-major (row, col, slice, frame,
component) order, with an optional packed uint8 mask (``name.vf1.mask.bin``).
An SM1 checkpoint is a JSON header (``name.sm1``) plus little-endian
float64 weights (``name.sm1.bin``) in layer order, each layer's weight
matrix (row-major) followed by its bias.

All writers are deterministic: identical inputs produce identical bytes.
"""

import json
from pathlib import Path

import numpy as np

from .errors import IoError
from .grid import NondimParams, VelocityImage, WallSurface
from .siren import SirenModel

VF1_MAGIC = "VF1"
SM1_MAGIC = "SM1"


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read JSON file {path}: {exc}") from exc





def write_velocity_image(path, img: VelocityImage):
    """Write a VF1 header + payload (+ mask payload when present)."""
    path = Path(path)
    payload = path.name + ".bin"
    mask_name = path.name + ".mask.bin" if img.mask is not None else None
    header = {
        "format": VF1_MAGIC,
        "dims": [int(n) for n in img.dims],
        "spacing_mm": [float(v) for v in img.spacing],
        "dt_s": float(img.dt),
        "origin_mm": [float(v) for v in img.origin],
        "t_min_s": float(img.t_min),
        "dtype": "f32",
        "byte_order": "little",
        "field_order": "row-major (row, col, slice, frame, component)",
        "payload": payload,
        "mask": mask_name,
        "meta": img.meta,
    }
    _write_json(path, header)
    data32 = np.ascontiguousarray(img.data, dtype="<f4")
    (path.parent / payload).write_bytes(data32.tobytes())
    if mask_name is not None:
        (path.parent / mask_name).write_bytes(
            np.ascontiguousarray(img.mask, dtype=np.uint8).tobytes()
        )


def read_velocity_image(path) -> VelocityImage:
    path = Path(path)
    header = read_json(path)
    if header.get("format") != VF1_MAGIC:
        raise IoError(f"{path} is not a {VF1_MAGIC} header")
    dims = tuple(int(n) for n in header["dims"])
    expected = int(np.prod(dims)) * 3
    raw = (path.parent / header["payload"]).read_bytes()
    data = np.frombuffer(raw, dtype="<f4")
    if data.size != expected:
        raise IoError(f"payload has {data.size} floats, header implies {expected}")
    data = data.astype(np.float64).reshape(*dims, 3)
    mask = None
    if header.get("mask"):
        raw_mask = (path.parent / header["mask"]).read_bytes()
        mask = np.frombuffer(raw_mask, dtype=np.uint8)
        if mask.size != int(np.prod(dims)):
            raise IoError("mask payload size does not match dims")
        mask = mask.reshape(dims).astype(bool)
    return VelocityImage(
        data=data,
        spacing=np.asarray(header["spacing_mm"], dtype=np.float64),
        dt=float(header["dt_s"]),
        origin=np.asarray(header["origin_mm"], dtype=np.float64),
        t_min=float(header["t_min_s"]),
        mask=mask,
        meta=header.get("meta", {}),
    )


def write_model(path, model: SirenModel):
    """Write an SM1 header + float64 weight payload."""
    path = Path(path)
    payload = path.name + ".bin"
    header = {
        "format": SM1_MAGIC,
        "depth": model.depth,
        "width": model.width,
        "omega0": float(model.omega0),
        "seed": int(model.seed),
        "nondim": model.nondim.to_dict(),
        "layer_shapes": [[list(w.shape), list(b.shape)] for w, b in model.layers],
        "dtype": "f64",
        "byte_order": "little",
        "payload": payload,
        "meta": model.meta,
    }
    _write_json(path, header)
    blob = np.concatenate(
        [np.concatenate([w.ravel(), b.ravel()]) for w, b in model.layers]
    ).astype("<f8")
    (path.parent / payload).write_bytes(blob.tobytes())


def read_model(path) -> SirenModel:
    path = Path(path)
    header = read_json(path)
    if header.get("format") != SM1_MAGIC:
        raise IoError(f"{path} is not an {SM1_MAGIC} header")
    raw = (path.parent / header["payload"]).read_bytes()
    theta = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    shapes = [(tuple(w), tuple(b)) for w, b in header["layer_shapes"]]
    from .siren import unpack_params

    layers = unpack_params(theta, shapes)
    return SirenModel(
        layers=layers,
        omega0=float(header["omega0"]),
        nondim=NondimParams.from_dict(header["nondim"]),
        seed=int(header.get("seed", 0)),
        meta=header.get("meta", {}),
    )


def write_wall_surface(path, wall: WallSurface):
    """Wall CSV with columns x,y,z,nx,ny,nz in mm."""
    table = np.hstack([wall.points, wall.normals])
    np.savetxt(path, table, delimiter=",", header="x,y,z,nx,ny,nz", comments="", fmt="%.17g")


def read_wall_surface(path) -> WallSurface:
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read wall CSV {path}: {exc}") from exc
    if table.shape[1] != 6:
        raise IoError(f"wall CSV must have 6 columns, got {table.shape[1]}")
    return WallSurface(points=table[:, :3], normals=table[:, 3:], provenance="file")


def write_points_csv(path, coords, values=None, value_names=("vx", "vy", "vz")):
    """Coordinate table x,y,z,t plus optional value columns."""
    coords = np.asarray(coords, dtype=np.float64)
    names = ["x", "y", "z", "t"]
    table = coords
    if values is not None:
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        table = np.hstack([coords, values])
        names += list(value_names[: values.shape[1]])
    np.savetxt(path, table, delimiter=",", header=",".join(names), comments="", fmt="%.17g")


def read_points_csv(path):
    """Returns (coords (n, 4), extra columns or None)."""
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read points CSV {path}: {exc}") from exc
    if table.shape[1] < 4:
        raise IoError(f"points CSV needs at least 4 columns, got {table.shape[1]}")
    extra = table[:, 4:] if table.shape[1] > 4 else None
    return table[:, :4], extra


def write_trace_csv(path, history):
    """Optimizer trace: iteration, loss, data_term, wall_term, grad_norm, step_length."""
    lines = ["iteration,loss,data_term,wall_term,grad_norm,step_length"]
    for row in history:
        lines.append(
            "%d,%.17g,%.17g,%.17g,%.17g,%.17g"
            % (
                row["iteration"],
                row["loss"],
                row.get("data_term", float("nan")),
                row.get("wall_term", float("nan")),
                row["grad_norm"],
                row["step_length"],
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_report_json(path, obj):
    _write_json(path, obj)
