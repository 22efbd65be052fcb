"""PPT-based separability tests for Gaussian states.

For a bipartition with a single mode on one side, positivity of the partial
transpose is necessary and sufficient for separability, so the verdicts here
are decisions, not just witnesses.  The partial transpose acts on covariance
matrices by flipping the momentum sign of every environment mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

from .symplectic import symplectic_spectrum

SEPARABLE = "separable"
ENTANGLED = "entangled"
INCONCLUSIVE = "inconclusive"

#: absolute tolerance on the PT symplectic eigenvalue at the boundary
PPT_TOL = 1e-9

#: discriminants below this are treated as invalid two-mode blocks
DISCRIMINANT_FLOOR = -1e-12


@dataclass(frozen=True)
class EntanglementVerdict:
    """Outcome of a PPT test.

    status is one of SEPARABLE, ENTANGLED or INCONCLUSIVE; the inconclusive
    band (width 2*tol below the separability threshold) flags states too
    close to the boundary to call either way.  log_negativity is
    max(0, -ln(min_pt_symplectic)), reported as exactly 0 whenever the state
    is not entangled at tolerance.
    """

    status: str
    min_pt_symplectic: float
    log_negativity: float


@dataclass(frozen=True)
class TwoModeBlock:
    """4x4 covariance of (system, one bath mode): [[A, C], [C^T, B]]."""

    a: NDArray[np.float64]
    b: NDArray[np.float64]
    c: NDArray[np.float64]

    @property
    def assembled(self) -> NDArray[np.float64]:
        return np.block([[self.a, self.c], [self.c.T, self.b]])


def partial_transpose(gamma: NDArray[np.float64],
                      system_modes: Iterable[int] = (0,)) -> NDArray[np.float64]:
    """Flip the momentum sign of every mode outside system_modes.

    Equivalent to conjugation by a diagonal sign matrix, so applying it
    twice restores the input exactly.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0] // 2
    sys = set(int(m) for m in system_modes)
    if not sys or sys >= set(range(n)):
        raise ValueError("system_modes must be a nonempty proper subset of the modes")
    if min(sys) < 0 or max(sys) >= n:
        raise ValueError(f"mode index out of range for {n} modes")
    signs = np.ones(2 * n)
    for m in range(n):
        if m not in sys:
            signs[2 * m + 1] = -1.0
    return signs[:, None] * gamma * signs[None, :]


def ppt_verdict(gamma: NDArray[np.float64],
                system_modes: Iterable[int] = (0,),
                tol: float = PPT_TOL) -> EntanglementVerdict:
    """Decide separability across the given bipartition.

    Requires one side of the bipartition to consist of a single mode, the
    regime where the PPT criterion is conclusive in both directions.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0] // 2
    sys = set(int(m) for m in system_modes)
    if min(len(sys), n - len(sys)) >= 2:
        raise ValueError(
            "PPT is only conclusive when one side of the bipartition is a single mode"
        )
    spec = symplectic_spectrum(partial_transpose(gamma, sys))
    min_pt = float(spec.min())
    if min_pt >= 1.0 - tol:
        status = SEPARABLE
    elif min_pt < 1.0 - 3.0 * tol:
        status = ENTANGLED
    else:
        status = INCONCLUSIVE
    log_neg = 0.0 if status == SEPARABLE else max(0.0, -float(np.log(min_pt)))
    return EntanglementVerdict(status=status, min_pt_symplectic=min_pt,
                               log_negativity=log_neg)


def reduce_two_mode(gamma: NDArray[np.float64], env_mode: int) -> TwoModeBlock:
    """Project the covariance onto (system mode 0, bath mode env_mode).

    The principal submatrix of a physical covariance is again physical, so
    the block feeds directly into lambda_of_block or ppt_verdict.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0] // 2
    if not 1 <= env_mode <= n - 1:
        raise ValueError(f"env_mode must be in 1..{n - 1}, got {env_mode}")
    k = 2 * env_mode
    idx = np.array([0, 1, k, k + 1])
    sub = gamma[np.ix_(idx, idx)]
    return TwoModeBlock(a=sub[:2, :2], b=sub[2:, 2:], c=sub[:2, 2:])


def _adjugate2(m: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def lambda_of_block(block: TwoModeBlock) -> float:
    """Squared smallest PT symplectic eigenvalue of a two-mode covariance.

    With d = det A + det B - 2 det C this is d/2 - sqrt(d^2/4 - det Gamma);
    values below 1 certify entanglement of the pair.  The discriminant is
    evaluated in a cancellation-free form,

        d^2/4 - det Gamma = (det A - det B)^2 / 4
                            - det C (det A + det B) + tr(adj(A) C adj(B) C^T),

    which stays accurate when det A, det B and det Gamma are all close to 1
    (near-pure pairs at cold temperatures).  Discriminants below -1e-12
    signal an invalid block and raise; tiny negatives round up to zero.
    """
    a, b, c = block.a, block.b, block.c
    det_a, det_b, det_c = map(np.linalg.det, (a, b, c))
    d = det_a + det_b - 2.0 * det_c
    disc = ((det_a - det_b) ** 2 / 4.0
            - det_c * (det_a + det_b)
            + np.trace(_adjugate2(a) @ c @ _adjugate2(b) @ c.T))
    if disc < DISCRIMINANT_FLOOR:
        raise ValueError(
            f"negative discriminant {disc:.3e}: block is not a valid covariance"
        )
    return float(d / 2.0 - np.sqrt(max(disc, 0.0)))
