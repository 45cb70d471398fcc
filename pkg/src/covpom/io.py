"""JSON codecs for the library's value types.

Conventions: a complex number is a two-element list [re, im]; an operator is
{"dim": d, "entries": flat row-major complex list}; a state is {"op": ...}
or {"spectral": [{"weight": w, "vector": [...]}]}; a POM is {"space_tag",
"outcomes", "effects"}.  Group data uses moduli tuples, dual points are
encoded as comma-joined index strings.  Measures are {"atoms": [[x, w]],
"density": {"x0", "dx", "values"}}.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .abelian import DiagonalRep, FiniteAbelianGroup, IsometryFamily, RepBlock, Subgroup
from .grids import Grid1D, WaveFunction
from .hilbert import (
    Effect,
    IntervalCell,
    Operator,
    Outcome,
    PointCell,
    Pom,
    RectCell,
    State,
)
from .posmom import ProbMeasure1D

__all__ = [
    "complex_to_json",
    "complex_from_json",
    "operator_to_json",
    "operator_from_json",
    "state_to_json",
    "state_from_json",
    "effect_to_json",
    "effect_from_json",
    "pom_to_json",
    "pom_from_json",
    "grid_to_json",
    "grid_from_json",
    "measure_to_json",
    "measure_from_json",
    "group_to_json",
    "group_from_json",
    "subgroup_to_json",
    "subgroup_from_json",
    "rep_to_json",
    "rep_from_json",
    "isometries_to_json",
    "isometries_from_json",
    "wavefunction_to_json",
    "wavefunction_from_json",
]


def complex_to_json(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(obj) -> complex:
    re, im = obj
    return complex(float(re), float(im))


def _cvector_to_json(vec) -> list:
    return [complex_to_json(z) for z in np.asarray(vec, dtype=complex).ravel()]


def _cvector_from_json(obj) -> np.ndarray:
    return np.array([complex_from_json(z) for z in obj], dtype=complex)


def operator_to_json(op: Operator) -> dict:
    return {"dim": op.dim, "entries": _cvector_to_json(op.mat)}


def operator_from_json(obj) -> Operator:
    dim = int(obj["dim"])
    entries = _cvector_from_json(obj["entries"])
    if entries.size != dim * dim:
        raise ValueError(f"operator entry count {entries.size} is not dim^2 = {dim * dim}")
    return Operator(entries.reshape(dim, dim))


def state_to_json(state: State) -> dict:
    if state.spectral is not None:
        return {
            "spectral": [
                {"weight": float(w), "vector": _cvector_to_json(v)}
                for w, v in state.spectral
            ]
        }
    return {"op": operator_to_json(state.op)}


def state_from_json(obj) -> State:
    if "spectral" in obj:
        from .hilbert import make_state

        return make_state(
            [
                (float(item["weight"]), _cvector_from_json(item["vector"]))
                for item in obj["spectral"]
            ]
        )
    state = State(operator_from_json(obj["op"]))
    state.validate(1e-8)
    return state


def effect_to_json(effect: Effect) -> dict:
    return {"op": operator_to_json(effect.op)}


def effect_from_json(obj) -> Effect:
    return Effect(operator_from_json(obj["op"]))


def _cell_to_json(cell) -> dict:
    if isinstance(cell, PointCell):
        return {"kind": "point", "value": list(cell.value)}
    if isinstance(cell, IntervalCell):
        return {"kind": "interval", "value": [cell.lo, cell.hi]}
    if isinstance(cell, RectCell):
        return {
            "kind": "rect",
            "value": [[cell.q_lo, cell.q_hi], [cell.p_lo, cell.p_hi]],
        }
    raise TypeError(f"unknown cell type {type(cell)}")


def _cell_from_json(obj):
    kind = obj["kind"]
    value = obj["value"]
    if kind == "point":
        return PointCell(tuple(int(v) for v in value))
    if kind == "interval":
        return IntervalCell(float(value[0]), float(value[1]))
    if kind == "rect":
        (qlo, qhi), (plo, phi) = value
        return RectCell(float(qlo), float(qhi), float(plo), float(phi))
    raise ValueError(f"unknown cell kind {kind!r}")


def pom_to_json(pom: Pom) -> dict:
    return {
        "space_tag": pom.space_tag,
        "outcomes": [
            {"label": o.label, "cell": _cell_to_json(o.cell)} for o in pom.outcomes
        ],
        "effects": [effect_to_json(e) for e in pom.effects],
    }


def pom_from_json(obj) -> Pom:
    outcomes = tuple(
        Outcome(str(o["label"]), _cell_from_json(o["cell"])) for o in obj["outcomes"]
    )
    effects = tuple(effect_from_json(e) for e in obj["effects"])
    return Pom(str(obj["space_tag"]), outcomes, effects)


def grid_to_json(grid: Grid1D) -> dict:
    return {"n": grid.n, "x0": grid.x0, "dx": grid.dx}


def grid_from_json(obj) -> Grid1D:
    return Grid1D(int(obj["n"]), float(obj["x0"]), float(obj["dx"]))


def measure_to_json(measure: ProbMeasure1D) -> dict:
    out: dict = {"atoms": [[x, w] for x, w in measure.atoms]}
    if measure.density is not None:
        out["density"] = {
            "x0": measure.grid.x0,
            "dx": measure.grid.dx,
            "values": [float(v) for v in measure.density],
        }
    return out


def measure_from_json(obj) -> ProbMeasure1D:
    atoms = tuple((float(x), float(w)) for x, w in obj.get("atoms", []))
    dens = obj.get("density")
    if dens is None:
        return ProbMeasure1D(atoms=atoms)
    values = np.asarray(dens["values"], dtype=float)
    grid = Grid1D(len(values), float(dens["x0"]), float(dens["dx"]))
    return ProbMeasure1D(atoms=atoms, grid=grid, density=values)


def wavefunction_to_json(psi: WaveFunction) -> dict:
    return {"grid": grid_to_json(psi.grid), "values": _cvector_to_json(psi.values)}


def wavefunction_from_json(obj) -> WaveFunction:
    grid = grid_from_json(obj["grid"])
    return WaveFunction(grid, _cvector_from_json(obj["values"]))


# --- group-side data --------------------------------------------------------


def group_to_json(group: FiniteAbelianGroup) -> dict:
    return {"moduli": list(group.moduli)}


def group_from_json(obj) -> FiniteAbelianGroup:
    return FiniteAbelianGroup(tuple(int(m) for m in obj["moduli"]))


def subgroup_to_json(sub: Subgroup) -> dict:
    return {
        "moduli": list(sub.parent.moduli),
        "generators": [list(g) for g in sub.elements],
    }


def subgroup_from_json(obj, parent: FiniteAbelianGroup | None = None) -> Subgroup:
    group = parent or FiniteAbelianGroup(tuple(int(m) for m in obj["moduli"]))
    gens = [tuple(int(v) for v in g) for g in obj["generators"]]
    return Subgroup.from_generators(group, gens)


def _dual_key(x: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in x)


def _dual_from_key(key: str):
    return tuple(int(v) for v in key.split(","))


def rep_to_json(rep: DiagonalRep) -> dict:
    return {
        "moduli": list(rep.group.moduli),
        "blocks": [
            {
                "weights": {_dual_key(x): w for x, w in blk.weights},
                "mult": blk.mult,
            }
            for blk in rep.blocks
        ],
    }


def rep_from_json(obj) -> DiagonalRep:
    group = FiniteAbelianGroup(tuple(int(m) for m in obj["moduli"]))
    blocks = tuple(
        RepBlock.from_mapping(
            {_dual_from_key(k): float(w) for k, w in blk["weights"].items()},
            int(blk["mult"]),
        )
        for blk in obj["blocks"]
    )
    return DiagonalRep(group, blocks)


def _cmatrix_to_json(mat: np.ndarray) -> dict:
    mat = np.asarray(mat, dtype=complex)
    return {"shape": list(mat.shape), "entries": _cvector_to_json(mat)}


def _cmatrix_from_json(obj) -> np.ndarray:
    shape = tuple(int(s) for s in obj["shape"])
    return _cvector_from_json(obj["entries"]).reshape(shape)


def isometries_to_json(fam: IsometryFamily) -> dict:
    return {
        "aux_dim": fam.aux_dim,
        "blocks": [
            {"entries": {_dual_key(x): _cmatrix_to_json(m) for x, m in blk}}
            for blk in fam.blocks
        ],
    }


def isometries_from_json(obj) -> IsometryFamily:
    blocks = []
    for blk in obj["blocks"]:
        blocks.append(
            {
                _dual_from_key(k): _cmatrix_from_json(m)
                for k, m in blk["entries"].items()
            }
        )
    return IsometryFamily.from_mappings(int(obj["aux_dim"]), blocks)
