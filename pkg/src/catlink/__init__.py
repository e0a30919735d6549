"""Remote entanglement of two qubits through cat-state ancillas.

Closed-form simulation of the mod 2 and mod 4 cat-state protocols with
ancilla photon loss and inefficient homodyne detection, plus a truncated
Fock-space oracle that cross-checks it.
"""

from .analysis import (
    OutcomeGrid,
    ProtocolConfig,
    heatmap,
    optimize_alpha,
    outcome_map,
    success_curve,
    success_probability,
)
from .cats import CatSpec, cat_amplitude, cat_components, cat_norm, coherent_amplitude
from .errors import (
    CatlinkError,
    DegenerateNorm,
    EncodingMismatch,
    GridTooCoarse,
    InvalidEfficiency,
    TruncationError,
    ZeroDensity,
)
from .measurement import (
    HomodynePOVM,
    JointOutcome,
    bell_fidelities,
    condition_grid,
    homodyne_condition,
    joint_outcomes,
    project_joint,
)
from .states import FourModeState, PairState, lossy_four_mode, lossy_pair, perfect_four_mode

__version__ = "0.1.0"
