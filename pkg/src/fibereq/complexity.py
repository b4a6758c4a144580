"""Analytical inference cost: real multiplications per recovered symbol.

Accounting contract (shared with the neural stack's instrumented counter):

* a real matrix product ``(a x b) . (b,)`` costs ``a*b`` multiplications,
* an element-wise product of length-n vectors costs ``n``,
* bias additions and activation functions cost nothing,
* the sparse reservoir matrix costs its stored nonzero count, which equals
  ``round(reservoir_size**2 * sparsity)`` (half-up),
* recurrent layers bill the per-step readout at every time step.

Per architecture this evaluates to:

* MLP:          ``ns*ni*n1 + n1*n2 + n2*n3 + n3*no``
* biLSTM:       ``2 * ns * nh * (4*ni + 4*nh + 3 + no)``
* ESN:          ``ns * (ni*Nr + round(Nr^2*sp) + 2*Nr + Nr*no)``
* CNN+MLP:      ``ni*nf*nk*L + L*nf*n1 + n1*n2 + n2*no``  with  L = ns-nk+1
* CNN+biLSTM:   ``ni*nf*nk*L + L * 2*nh*(4*nf + 4*nh + 3 + no)``

where ns is the window length, ni=4 input features and no=2 outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .topologies import (
    N_FEATURES,
    N_OUTPUTS,
    BiLstmSpec,
    CnnBiLstmSpec,
    CnnMlpSpec,
    EsnSpec,
    MlpSpec,
    TopologySpec,
)

__all__ = [
    "RmpsReport",
    "rmps",
    "cnn_layer_rmps",
    "within_budget",
    "round_half_up",
    "format_2sig",
]

DEFAULT_BUDGET_TOLERANCE = 1.1


def round_half_up(x: float) -> int:
    import math

    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class RmpsReport:
    """Total multiplications per symbol plus the per-stage breakdown."""

    topology: TopologySpec
    total: int
    breakdown: dict

    def __post_init__(self):
        if self.total != sum(self.breakdown.values()):
            raise ValueError("breakdown terms must sum to the total")


def rmps(spec: TopologySpec) -> RmpsReport:
    """Real multiplications per recovered symbol for one topology.

    Breakdown keys follow an input/hidden/output (a/b/c) staging; for the
    composite architectures the flatten-to-dense transition is folded into
    the first dense fan-in term.
    """
    ns, ni, no = spec.window_symbols, N_FEATURES, N_OUTPUTS
    if isinstance(spec, MlpSpec):
        n1, n2, n3 = spec.hidden1, spec.hidden2, spec.hidden3
        parts = {
            "a_input": ns * ni * n1,
            "b_hidden": n1 * n2 + n2 * n3,
            "c_output": n3 * no,
        }
    elif isinstance(spec, BiLstmSpec):
        nh = spec.hidden_units
        parts = {"a_layer": 2 * ns * nh * (4 * ni + 4 * nh + 3 + no)}
    elif isinstance(spec, EsnSpec):
        nr = spec.reservoir_size
        nnz = round_half_up(nr * nr * spec.sparsity)
        parts = {
            "a_input_and_reservoir": ns * (ni * nr + nnz),
            "b_leak": ns * 2 * nr,
            "c_readout": ns * nr * no,
        }
    elif isinstance(spec, CnnMlpSpec):
        nf, nk = spec.filters, spec.kernel_size
        n1, n2 = spec.hidden1, spec.hidden2
        length = _conv_out_len(ns, nk)
        parts = {
            "a_conv": ni * nf * nk * length,
            "b_transition": length * nf * n1,
            "c_dense": n1 * n2 + n2 * no,
        }
    elif isinstance(spec, CnnBiLstmSpec):
        nf, nk = spec.filters, spec.kernel_size
        nh = spec.hidden_units
        length = _conv_out_len(ns, nk)
        parts = {
            "a_conv": ni * nf * nk * length,
            "b_recurrent": length * 2 * nh * (4 * nf + 4 * nh + 3 + no),
        }
    else:
        raise TypeError(f"unsupported topology {type(spec).__name__}")
    return RmpsReport(topology=spec, total=sum(parts.values()), breakdown=parts)


def _conv_out_len(ns: int, nk: int, padding: int = 0, dilation: int = 1, stride: int = 1) -> int:
    length = (ns + 2 * padding - dilation * (nk - 1) - 1) // stride + 1
    if length < 1:
        raise ValueError("convolution output length would be < 1")
    return length


def cnn_layer_rmps(
    n_filters: int,
    kernel_size: int,
    n_steps: int,
    n_features: int = N_FEATURES,
    padding: int = 0,
    dilation: int = 1,
    stride: int = 1,
) -> int:
    """Multiplication count of a general 1-D convolutional layer.

    Reduces to the composite architectures' convolution term at the default
    padding=0, dilation=1, stride=1 configuration. The output-length bracket
    uses floor semantics.
    """
    length = _conv_out_len(n_steps, kernel_size, padding, dilation, stride)
    return n_features * n_filters * kernel_size * length


def within_budget(
    spec: TopologySpec, budget: float, tolerance: float = DEFAULT_BUDGET_TOLERANCE
) -> bool:
    """True when the topology costs at most ``budget * tolerance`` RMpS."""
    if budget <= 0:
        return False
    return rmps(spec).total <= budget * tolerance


def format_2sig(value: float) -> str:
    """Two-significant-figure scientific string, e.g. ``1.2E+05``.

    Uses the platform's correctly-rounded float formatting (ties to even).
    """
    return format(float(value), ".1E")
