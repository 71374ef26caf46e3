"""minperturb: minimum-norm adversarial perturbations for differentiable
classifiers, with closed-form/brute-force optimality oracles, geometry
diagnostics, and a deterministic experiment harness."""

__version__ = "0.1.0"

from .attacks import (AttackConfig, AttackResult, clip_to_box, df_binary,
                      df_multiclass, df_multiclass_step, df_step_binary,
                      line_search_to_boundary, projection_step_binary,
                      projection_step_multiclass, renormalize_to_eps,
                      run_attack, sdf_binary, sdf_linf, sdf_multiclass,
                      sdf_targeted)
from .data import Dataset, LabeledSample, generate_dataset
from .diagnostics import (CurvatureReport, DiagnosticsReport, aggregate,
                          cosine_alignment, curvature_report,
                          gamma_fooling_curve, hessian_spectral_norm,
                          hessian_vector_product, normalized_curvature)
from .errors import (ConfigError, DegenerateGradientError,
                     OracleNotFoundError)
from .models import (Classifier, challenger_label, is_fooled, load_model,
                     make_affine_binary, make_affine_multiclass, make_mlp,
                     make_quadric_binary, save_model)
from .oracle import (OracleSolution, affine_binary_oracle,
                     affine_multiclass_oracle, grid_scan_oracle, oracle_for,
                     quadric_oracle)
from .training import TrainConfig, accuracy, adversarial_fine_tune, train
