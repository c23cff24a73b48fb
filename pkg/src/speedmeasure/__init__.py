"""Variation, speed measures and absolute continuity of curves in metric spaces."""
__version__ = "0.1.0"

from .errors import ConfigError, DomainError, InconsistencyError, NotBVError, SpeedMeasureError
from .metric_spaces import (AxiomReport, Circle, Discrete, Euclidean, MetricSpace, RealLine, Snowflake,
                            distance, metric_axiom_report, space_from_dict)
from .curves import (AnalyticCurve, Composite, Curve, Interval, JumpGaps, PiecewiseLinear, Restriction,
                     SampledCadlag, one_sided_limits)
from .variation import (VariationProfile, VariationResult, cell_variations, cumulative_profile,
                        interval_variations, signed_variation, var_sum, variation)
from .speed_measure import (Atom, SpeedMeasure, VarMeasureReport, atom_mass_from_variation,
                            build_speed_measure, continuity_verdict, measure_closed_union,
                            measure_finite_union, measure_interval, speed_measure_csv,
                            var_vs_measure_check)
from .decomposition import (ACpReport, DensityProfile, LebesgueDecomposition, LengthIdentityReport,
                            MetricDerivativeEstimate, acp_classify, decompose, density_profile,
                            length_identity_check, metric_derivative, metric_derivatives,
                            variation_quotients)
from .ac_analysis import (IntervalFamily, LuzinReport, MeasureTestReport, NestedNullSet, ProbeResult,
                          Verdict, ac_measure_test, ac_probe, banach_zaretsky_verdict,
                          luzin_n_upper_bound)
from .oracles import (CONTINUOUS_ORACLES, ORACLE_NAMES, cantor, cantor_exact,
                      cantor_plus_linear_with_step, list_oracles, non_cadlag_step, oracle_library)
from .invariants import VerifyReport, verify_curve

