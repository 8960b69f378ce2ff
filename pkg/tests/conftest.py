import numpy as np

from mahaclass.linalg import GaussianModel, cholesky


def make_model(mean, cov, n, ridge=0.0) -> GaussianModel:
    """GaussianModel with prescribed statistics (bypasses fitting)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    chol = cholesky(cov + ridge * np.eye(mean.shape[0]))
    return GaussianModel(mean=mean, cov=cov, chol=chol, n=n, ridge=ridge)
