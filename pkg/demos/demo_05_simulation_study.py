"""
One replicate of the class/group simulation study
=================================================

Respondents in three classes answer 24 items in six groups; within a group a
correct answer is followed by another with probability rho. Both methods are
fitted and judged by how close their posterior predictive p-values sit to 0.5.
This takes a few minutes on one core.
"""
import warnings

from ssdmh import (
    AuxChainConfig,
    PppConfig,
    SamplerConfig,
    SimDesign,
    adjacency_rmse,
    fit_elasso,
    generate_dataset,
    posterior_predictive_pvalues,
    posterior_summary,
    pvalue_rmse,
    run_chain,
)

design = SimDesign(n=300, p=24, rho=0.8, p11=0.7, p12=0.7, seed=11)
x, truth = generate_dataset(design)
print("data", x.shape, "overall success rate", round(float(x.mean()), 3))

chain = run_chain(x, SamplerConfig(iterations=400, burn_in=200, seed=1,
                                   aux=AuxChainConfig(sweeps=3), progress_every=0))
bayes = posterior_summary(chain)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    elasso = fit_elasso(x)

ppp = PppConfig(num_draws=200, sim_sweeps=50, seed=2)
print("p-value RMSE   Bayes ", round(pvalue_rmse(posterior_predictive_pvalues(chain, x, ppp)), 3))
print("p-value RMSE   elasso", round(pvalue_rmse(posterior_predictive_pvalues(elasso, x, ppp)), 3))
print("adjacency RMSE Bayes ", round(adjacency_rmse(bayes.signed_adjacency, truth.signed_adjacency), 3))
print("adjacency RMSE elasso", round(adjacency_rmse(elasso.signed_adjacency, truth.signed_adjacency), 3))
