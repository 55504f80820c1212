"""Expected utilities on dual-edge networks of probabilistic and utility
dependencies."""

from .algebra import (CornerConfig, DiscreteFactor, ExpLinExpr, LabeledTable, LinForm,
                      gaussian_expectation, table_circ, table_reduce_sum)
from .engine import (Monomial, backward_induction, backward_induction_eu,
                     evaluate_utility_pointwise, expected_utility, junction_tree_eu,
                     rank_decisions, utility_expansion)
from .errors import *  # noqa: F401,F403
from .graph import (CliqueSet, Deun, JunctionTree, build_junction_tree, enumerate_cliques,
                    is_decomposable, make_decomposable, validate_deun)
from .model import (Attribute, DecisionModel, ExpDecreasing, ExpIncreasing, LinearGaussian,
                    OneMinusExp, TabularCpd, TabularUtility, conditional_utility_vector,
                    decompose_model, normalize_utility, validate_model)
from .modelfile import loads_model, parse_model, serialize_model, write_model
from .oracle import McReport, exact_discrete_eu, monte_carlo_eu, quadrature_expectation

__version__ = "0.1.0"


def example_path(name: str = "food_security.json"):
    """Path of a bundled example model file."""
    from importlib.resources import files
    return files("deun") / "data" / name
