"""Modelling, simulation and subject-specific mapping for a 4-DOF spring-loaded foot interface."""
from .errors import (AllStatic, AmbiguousSelection, ConfigError, ConstantChannel, DegenerateGeometry,
                     DegenerateRange, DegenerateWhitening, EmptySeries, EmptyTrack, FootInterfaceError,
                     NonConvergence, NotDiagonal, OutOfDomain, OutOfWorkspace, SingularDenominator,
                     TooShort)
from .geometry import (INSIDE_BASE, OUTSIDE_BASE, DeviceGeometry, SpringSpec, default_geometry,
                       geometry_from_text, load_geometry)
from .kinematics import (ContactMode, ForceFrame, PedalPose, forward_kinematics, inverse_kinematics,
                         lengths_from_forces, mode_classify, pitch_from_forces, pose_from_forces,
                         workspace_contains)
from .statics import (EnergyLandscape, Wrench, elastic_energy, energy_scan, restoring_wrench,
                      resultant_wrench, stiffness_matrix, structure_matrix)
from .signals import (ReferenceTrack, TrialRecord, foot_path_error, moving_average, pose_trajectory,
                      reference_track, smoothness_sparc, sparc, velocity_filter)
from .mapping import (CalibrationSet, SubjectModel, ZeroBand, align_component, diagonal_transform,
                      direction_accuracy, fit_ica, kinematic_command, predict_command,
                      zero_band_from_model, zscore_stats)
from .synthetic import (CohortSpec, MotionProfile, SyntheticSubject, cohort_subjects, forces_for_pose,
                        generate_trial)

__version__ = "0.1.0"
