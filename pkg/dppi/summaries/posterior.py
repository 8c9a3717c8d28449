"""
Posterior summary tables: mean, equi-tailed 95% interval and MCSE per parameter.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field

from ..contracts.errors import DomainError
from ..inference.diagnostics import MIN_CHAIN_LENGTH, batch_means_mcse
from ..inference.samplers import PosteriorSamples


class ParameterSummary(BaseModel):
    name: str
    mean: float
    lower: float = Field(description="2.5% quantile")
    upper: float = Field(description="97.5% quantile")
    mcse: Optional[float] = Field(default=None, description="Batch-means MCSE; unset below 100 draws")


class PosteriorSummary(BaseModel):
    """Per-parameter rows plus run bookkeeping."""

    model: str
    radius: float
    draws: int
    chains: int
    rows: List[ParameterSummary]
    acceptance: Dict[str, float] = Field(default_factory=dict)
    latent_acceptance: float = math.nan

    def row(self, name: str) -> ParameterSummary:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def render_table(self) -> str:
        """Plain-text table, one line per parameter: mean (2.5%, 97.5%) MCSE."""
        lines = [
            f"model={self.model} R={self.radius:.4g} draws={self.draws} chains={self.chains}",
            f"{'parameter':<10} {'mean':>12} {'2.5%':>12} {'97.5%':>12} {'MCSE':>10} {'accept':>7}",
        ]
        for r in self.rows:
            mcse = f"{r.mcse:10.3g}" if r.mcse is not None else f"{'-':>10}"
            acc = self.acceptance.get(r.name)
            acc_s = f"{acc:7.3f}" if acc is not None else f"{'-':>7}"
            lines.append(f"{r.name:<10} {r.mean:12.4g} {r.lower:12.4g} {r.upper:12.4g} {mcse} {acc_s}")
        lines.append(f"latent acceptance {self.latent_acceptance:.3f}")
        return "\n".join(lines)


def summarize_posterior(samples: Union[PosteriorSamples, Sequence[PosteriorSamples]]) -> PosteriorSummary:
    """Column-wise mean and 2.5%/97.5% quantiles, pooling several chains.

    MCSE is the square root of the summed squared per-chain batch-means
    errors over the chain count; it is left unset when any chain is
    shorter than the batch-means minimum. Acceptance rates are averaged
    across chains.

    Raises:
        DomainError: If there are no draws
    """
    chains = [samples] if isinstance(samples, PosteriorSamples) else list(samples)
    if not chains or sum(c.n for c in chains) == 0:
        raise DomainError("BAD_CONFIG", "no draws to summarise")
    names = chains[0].names
    pooled = np.vstack([c.draws for c in chains])
    rows = []
    for idx, name in enumerate(names):
        col = pooled[:, idx]
        lower, upper = np.quantile(col, [0.025, 0.975], method="linear")
        mcse = None
        if all(c.n >= MIN_CHAIN_LENGTH for c in chains):
            errs = [batch_means_mcse(c.draws[:, idx]) for c in chains]
            mcse = math.sqrt(sum(e * e for e in errs)) / len(errs)
        rows.append(ParameterSummary(name=name, mean=float(col.mean()), lower=float(lower), upper=float(upper), mcse=mcse))
    acceptance = {
        name: float(np.mean([c.acceptance[name] for c in chains if name in c.acceptance]))
        for name in names
        if any(name in c.acceptance for c in chains)
    }
    return PosteriorSummary(
        model=chains[0].model,
        radius=chains[0].radius,
        draws=pooled.shape[0],
        chains=len(chains),
        rows=rows,
        acceptance=acceptance,
        latent_acceptance=float(np.nanmean([c.latent_acceptance for c in chains])),
    )
