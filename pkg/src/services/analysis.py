"""Orchestration of one analysis request."""

from ..core.models import AnalysisRequest, Picture, Report
from ..utils.logger import get_logger
from .crosscheck import cross_check
from .hamreduce import run_hamiltonian
from .lagreduce import run_lagrangian
from .phasespace import build_model
from .report import build_report
from .verification import merge_summaries, numeric_verify

logger = get_logger(__name__)


def analyze(request: AnalysisRequest) -> Report:
    """
    Run the requested pictures, the cross-picture check when both ran, and
    the sampling verification; errors propagate as AnalysisError.
    """
    spec = request.spec
    logger.info(f"Analyzing '{spec.name}' ({request.picture.value}, max {request.max_generations} generations)")
    model = build_model(spec)

    lag = ham = equivalence = None
    if request.picture in (Picture.LAGRANGIAN, Picture.BOTH):
        lag = run_lagrangian(model, request.max_generations)
    if request.picture in (Picture.HAMILTONIAN, Picture.BOTH):
        ham = run_hamiltonian(model, request.max_generations)
    if lag is not None and ham is not None:
        equivalence = cross_check(lag, ham)

    summaries = [
        numeric_verify(reduction, request.verify_samples, request.rng_seed)
        for reduction in (lag, ham)
        if reduction is not None
    ]
    return build_report(spec, lag, ham, equivalence, merge_summaries(summaries))
