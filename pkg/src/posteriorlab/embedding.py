"""Analytic reconstructive maps: planar bijection + isometric lift.

A reconstructive map sends plane points to d-dimensional space as
``x = B w(A v + b) + c`` where ``w`` is a componentwise strictly monotone
smooth warp, ``A`` is invertible, and ``B`` has orthonormal columns.  The
map is bijective onto its image and the lift preserves distances, so the
category posterior computed on the plane transfers to embedded points
unchanged: densities pick up the same Jacobian factor in numerator and
denominator of the posterior ratio, which therefore cancels.  Because
every piece has a closed-form inverse, that invariance is testable to
machine precision instead of holding only approximately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mixtures import Mixture2D, _as_float_array
from .oracle import posterior_2d
from .rng import standard_normals, stream

ON_MANIFOLD_TOL = 1e-6

WARP_KINDS = ("identity", "asinh", "sinh")


class OffManifoldError(ValueError):
    """Input point is not (numerically) on the embedded plane."""

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(
            f"point lies off the embedded plane: residual norm {residual:.3e} "
            f"exceeds tolerance {ON_MANIFOLD_TOL:.0e}"
        )


@dataclass(frozen=True)
class ComponentWarp:
    """Strictly monotone smooth scalar map applied to each plane coordinate.

    Kinds: ``identity``; ``asinh`` gives scale*arcsinh(rate*t) (compresses
    far from the origin); ``sinh`` gives scale*sinh(rate*t) (expands).
    All have closed-form inverses and strictly positive derivatives.
    """

    kind: str = "identity"
    scale: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in WARP_KINDS:
            raise ValueError(f"unknown warp kind {self.kind!r}; choose from {WARP_KINDS}")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise ValueError(f"warp scale must be positive, got {self.scale}")
        if not (self.rate > 0 and np.isfinite(self.rate)):
            raise ValueError(f"warp rate must be positive, got {self.rate}")

    def apply(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "identity":
            return t + 0.0
        if self.kind == "asinh":
            return self.scale * np.arcsinh(self.rate * t)
        return self.scale * np.sinh(self.rate * t)

    def invert(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "identity":
            return u + 0.0
        if self.kind == "asinh":
            return np.sinh(u / self.scale) / self.rate
        return np.arcsinh(u / self.scale) / self.rate

    def derivative(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "identity":
            return np.ones_like(t)
        if self.kind == "asinh":
            return self.scale * self.rate / np.sqrt(1.0 + (self.rate * t) ** 2)
        return self.scale * self.rate * np.cosh(self.rate * t)


IDENTITY_WARP = ComponentWarp()


@dataclass(frozen=True, eq=False)
class PlanarBijection:
    """Invertible plane map: warp(matrix @ v + shift), componentwise warp."""

    matrix: np.ndarray = field(default_factory=lambda: np.eye(2))
    shift: np.ndarray = field(default_factory=lambda: np.zeros(2))
    warp: ComponentWarp = IDENTITY_WARP

    def __post_init__(self):
        matrix = _as_float_array(self.matrix, (2, 2), "matrix")
        shift = _as_float_array(self.shift, (2,), "shift")
        det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
        if det == 0.0:
            raise ValueError("affine matrix must be invertible")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "_det", float(det))

    def apply(self, v):
        v = np.asarray(v, dtype=np.float64)
        return self.warp.apply(v @ self.matrix.T + self.shift)

    def invert(self, u):
        u = np.asarray(u, dtype=np.float64)
        pre = self.warp.invert(u) - self.shift
        if pre.ndim == 1:
            return np.linalg.solve(self.matrix, pre)
        return np.linalg.solve(self.matrix, pre.T).T

    def jacobian_det(self, v) -> float:
        v = np.asarray(v, dtype=np.float64).reshape(2)
        pre = self.matrix @ v + self.shift
        return float(abs(self._det) * np.prod(self.warp.derivative(pre)))


IDENTITY_BIJECTION = PlanarBijection()


@dataclass(frozen=True, eq=False)
class IsometricLift:
    """Distance-preserving lift to d dimensions: basis @ u + offset.

    ``basis`` is d x 2 with orthonormal columns, so the lift is globally
    (hence locally) isometric.
    """

    basis: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[1] != 2 or basis.shape[0] < 2:
            raise ValueError(f"basis must be (d >= 2) x 2, got shape {basis.shape}")
        gram = basis.T @ basis
        if not np.allclose(gram, np.eye(2), rtol=0.0, atol=1e-12):
            raise ValueError("basis columns must be orthonormal within 1e-12")
        offset = _as_float_array(self.offset, (basis.shape[0],), "offset")
        basis = basis.copy()
        basis.flags.writeable = False
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def apply(self, u):
        u = np.asarray(u, dtype=np.float64)
        return u @ self.basis.T + self.offset

    def project(self, x):
        """Plane coordinates of ``x`` plus the off-plane residual norm."""
        x = np.asarray(x, dtype=np.float64)
        centered = x - self.offset
        u = centered @ self.basis
        residual = centered - u @ self.basis.T
        return u, float(np.linalg.norm(residual, axis=-1))


@dataclass(frozen=True, eq=False)
class ReconstructiveMap:
    """Composite plane-to-d map: bijection on the plane, then isometric lift."""

    bijection: PlanarBijection
    lift: IsometricLift

    @property
    def dim(self) -> int:
        return self.lift.dim


def make_lift(d: int, seed: int) -> IsometricLift:
    """Seeded random isometric lift into ``d`` dimensions.

    Basis columns come from Gram-Schmidt on Gaussian draws; the offset is a
    Gaussian d-vector from the same stream.
    """
    if d < 2:
        raise ValueError(f"lift dimension must be >= 2, got {d}")
    gen = stream(seed, 0x4C494654)  # fixed stream tag for lift construction
    while True:
        raw = standard_normals(gen, 2 * d).reshape(2, d)
        a = raw[0]
        norm_a = np.linalg.norm(a)
        if norm_a < 1e-8:
            continue
        a = a / norm_a
        b = raw[1] - (raw[1] @ a) * a
        norm_b = np.linalg.norm(b)
        if norm_b < 1e-8:
            continue
        b = b / norm_b
        # One re-orthogonalization pass keeps the Gram matrix at 1e-16 scale.
        b = b - (b @ a) * a
        b = b / np.linalg.norm(b)
        break
    offset = standard_normals(gen, d)
    return IsometricLift(basis=np.stack([a, b], axis=1), offset=offset)


def embed(rmap: ReconstructiveMap, v) -> np.ndarray:
    """Map plane points to d-space: lift(bijection(v))."""
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"plane point must be finite, got {v!r}")
    return rmap.lift.apply(rmap.bijection.apply(v))


def invert(rmap: ReconstructiveMap, x) -> np.ndarray:
    """Recover the plane point of an embedded ``x``.

    Raises :class:`OffManifoldError` when the component of ``x``
    orthogonal to the embedded plane exceeds ``ON_MANIFOLD_TOL``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (rmap.dim,):
        raise ValueError(f"expected a {rmap.dim}-vector, got shape {x.shape}")
    u, residual = rmap.lift.project(x)
    if residual > ON_MANIFOLD_TOL:
        raise OffManifoldError(residual)
    return rmap.bijection.invert(u)


def bijection_jacobian(bij: PlanarBijection, v) -> float:
    """|det J| of the plane bijection at ``v``; strictly positive."""
    return bij.jacobian_det(v)


def posterior_via_embedding(model: Mixture2D, rmap: ReconstructiveMap, x) -> np.ndarray:
    """True posterior at an embedded point, computed on the plane.

    Valid because the plane posterior is invariant under the bijection
    (Jacobian factors cancel) and under the isometric lift (densities scale
    by the same surface factor).
    """
    return posterior_2d(model, invert(rmap, x))


# ---------------------------------------------------------------------------
# Serialization


def map_to_json(rmap: ReconstructiveMap) -> dict:
    return {
        "format_version": 1,
        "bijection": {
            "matrix": rmap.bijection.matrix.tolist(),
            "shift": rmap.bijection.shift.tolist(),
            "warp": {
                "kind": rmap.bijection.warp.kind,
                "scale": rmap.bijection.warp.scale,
                "rate": rmap.bijection.warp.rate,
            },
        },
        "lift": {
            "basis": rmap.lift.basis.tolist(),
            "offset": rmap.lift.offset.tolist(),
        },
    }


def map_from_json(doc: dict) -> ReconstructiveMap:
    try:
        bij = doc["bijection"]
        lift = doc["lift"]
        warp = bij["warp"]
        rmap = ReconstructiveMap(
            bijection=PlanarBijection(
                matrix=bij["matrix"],
                shift=bij["shift"],
                warp=ComponentWarp(
                    kind=warp["kind"], scale=warp["scale"], rate=warp["rate"]
                ),
            ),
            lift=IsometricLift(basis=lift["basis"], offset=lift["offset"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"reconstructive-map document missing field: {exc}") from exc
    return rmap


def save_map(rmap: ReconstructiveMap, path) -> None:
    Path(path).write_text(json.dumps(map_to_json(rmap), indent=2, sort_keys=True) + "\n")


def load_map(path) -> ReconstructiveMap:
    return map_from_json(json.loads(Path(path).read_text()))
