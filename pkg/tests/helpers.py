"""Shared sampling checks used by module tests and the acceptance suite."""

from dataclasses import dataclass, field

import numpy as np

from clusterspaces.stability_space import (
    CellId,
    _Charts,
    cells_containing,
    chart_test,
    classify,
    in_U,
    preserves_skew_form,
    random_ambient_point,
    random_stab_point,
    transition_matrix,
    varpi_eval,
)


@dataclass
class CellSurvey:
    samples: int = 0
    classified: int = 0
    double_assigned: int = 0
    chart_test_mismatch: int = 0
    varpi_mismatch: int = 0
    matrices: int = 0
    bad_matrices: int = 0
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.double_assigned or self.chart_test_mismatch or self.varpi_mismatch or self.bad_matrices)


def survey_cells(cf, count: int, seed: int, matrices_every: int = 1) -> CellSurvey:
    """Partition, chart-test, ϖ and transition-matrix checks on seeded samples.

    Half the samples are ambient pairs of tropical points, half are drawn from
    the space itself with boundary coordinates.
    """
    rng = np.random.default_rng(seed)
    rep = CellSurvey()
    E = cf.E
    for k in range(count):
        p = random_ambient_point(cf.n, rng, int(rng.integers(len(E)))) if k % 2 else random_stab_point(cf, rng)
        ch = _Charts(E, p)
        rep.samples += 1
        found = cells_containing(cf, p, ch)
        cell = classify(cf, p, charts=ch)
        if len(found) > 1:
            rep.double_assigned += 1
            rep.notes.append(("double", k))
        if (cell is None) != (not found) or (cell is not None and found[0] != cell):
            rep.double_assigned += 1
            rep.notes.append(("classify", k))
        if bool(chart_test(cf, p, charts=ch)) != (cell is not None):
            rep.chart_test_mismatch += 1
            rep.notes.append(("chart", k))
        if cell is None:
            continue
        rep.classified += 1
        w = varpi_eval(cf, cell, p, charts=ch)
        s = cell.sigma
        if list(w.re) != ch.x[s] or list(w.im) != ch.y[s]:
            rep.varpi_mismatch += 1
            rep.notes.append(("varpi", k))
        if k % matrices_every:
            continue
        for other in overlapping_cells(cf, p, ch):
            M = transition_matrix(cf, cell, other, p)
            rep.matrices += 1
            if abs(round(np.linalg.det(M))) != 1 or not preserves_skew_form(cf, M, cell.sigma, other.sigma):
                rep.bad_matrices += 1
                rep.notes.append(("matrix", k, other))
    return rep


def overlapping_cells(cf, p, ch) -> list:
    """All cells whose chart domain ``U`` contains ``p``."""
    out = []
    for tau in cf.faces:
        for b in cf.E.vertices:
            if tau <= cf.cone_rays[b]:
                c = CellId(b, tau)
                if in_U(cf, c, p, ch):
                    out.append(c)
    return out
