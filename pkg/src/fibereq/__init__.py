"""fibereq: coherent fiber-link simulation, neural equalizers, and
real-multiplication complexity auditing.

Subpackages/modules:

* ``dsp``        -- PRBS, 16-QAM, RRC shaping, waveform containers
* ``channel``    -- split-step Manakov propagation and EDFA noise
* ``receiver``   -- CDC, matched filter, alignment, BER/Q metrics
* ``dbp``        -- digital back-propagation baseline and its cost model
* ``neural``     -- from-scratch equalizer models, training, checkpoints
* ``complexity`` -- analytical multiplications-per-symbol calculator
* ``search``     -- preset catalog and budget-constrained hyper-search
* ``pipeline``   -- end-to-end dataset generation and evaluation
* ``cli``        -- the ``fibereq`` command-line driver
"""

__version__ = "0.1.0"

from . import channel, complexity, dbp, dsp, receiver, topologies  # noqa: F401
