"""spikefuse: a multimodal (audio-visual) spiking neural network simulator.

Images enter through rate coding and audio spectrograms through
time-to-first-spike coding; a shared leaky integrate-and-fire layer
integrates both, learns with dual STDP rules under a combined update,
and decodes with input-masking bias weights.
"""

from .core import (
    Modality,
    ModalSpikeTrains,
    RngSeed,
    SpikeTrain,
    TimeGrid,
    as_seed,
    build_time_grid,
    spike_count,
)
from .encoding import (
    IntensityGrid,
    RateEncoderConfig,
    RateMode,
    SpectrogramConfig,
    TtfsEncoderConfig,
    compute_spectrogram,
    rate_encode,
    ttfs_encode,
)
from .errors import (
    ConfigurationError,
    FormatError,
    IngestionError,
    NumericError,
    SpikeFuseError,
    StateError,
    StructuralError,
    ValidationError,
)
from .neuron import (
    LifLayerState,
    LifParams,
    SpikeRecord,
    SynapseMatrix,
    gather_current,
    lif_step,
    simulate_window,
)
from .plasticity import (
    CombinedUpdateParams,
    PairingPolicy,
    RateStdpParams,
    SpikePair,
    TemporalStdpParams,
    apply_combined_update,
    initial_synapses,
    pair_spikes,
    rate_stdp_delta,
    temporal_stdp_delta,
)
from .network import (
    BiasTerms,
    EncoderSettings,
    EvalReport,
    MaskMode,
    MultimodalNetwork,
    Sample,
    assign_classes,
    biased_classify,
    build_network,
    classify_dataset,
    compute_bias,
    evaluate,
    forward,
    fused_scores,
    train,
)
from .datasets import (
    SyntheticDatasetSpec,
    generate_dataset,
    generate_samples,
    read_dataset,
    write_dataset,
)
from .persist import load_network, read_bias, save_network, write_bias

__version__ = "0.1.0"
