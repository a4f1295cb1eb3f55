"""Simulation and data reduction for a four-detector tetrahedron polarimeter."""
from .calibration import (CalibrationRecord, CalibrationResult, ReconstructionResult,
                          calibrate, calibration_quartet, reconstruct,
                          reconstruction_uncertainty)
from .instrument import (InstrumentMatrix, PolarimeterModel, TetrahedronFrame,
                         detector_intensities, effective_frame, instrument_matrix,
                         instrument_matrix_from_frame, maximize_determinant,
                         optimal_splitting_ratio, simulate_counts)
from .optics import (AnalyzerSpec, PpbsSpec, WaveplateSpec, analyzer_intensities,
                     generate_state, ppbs_split, waveplate_matrix)
from .stokes import (JonesVector, ReducedStokes, StokesVector, degree_of_polarization,
                     fidelity, fidelity_pure, jones_to_stokes, stokes_to_coherency)

__version__ = "0.1.0"
