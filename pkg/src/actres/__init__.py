"""Clock-phase constraint scheduling and verification for sampled-data analog circuits."""

from .constraint_graph import (Arc, ConstraintGraph, Cycle, FeasibilityReport, ProjectionWarning,
                               build_graph, check_feasibility, classify, enumerate_cycles, project_to_fast)
from .models import (CheckRow, CompositePhase, Config, Constraint, Corner, EdgeRef, Kind, KindSource,
                     ParseError, PhaseDef, Polarity, Schedule, VariantTiming, VerificationReport)
from .phasefile_io import (parse_composites, parse_config, parse_constraints, parse_definitions,
                           parse_schedule, parse_variant_timings, write_composites, write_constraints,
                           write_definitions, write_schedule, write_variant_timings)
from .scheduler import CrossArcError, DisconnectedError, ScheduleError, normalize, schedule_nodes, verify_schedule
from .synth_verify import build_composites, fold_variant, verify_synthesis
from .target_gen import (AcyclicTargetGraph, SlackAssignment, SlackOvershootError, TargetGraph, assign_slacks,
                         break_cycles, build_target_graph)
from .waveform_emit import WaveformTrace, check_relationships, emit_dot, emit_pwl, unroll

__version__ = "0.1.0"
