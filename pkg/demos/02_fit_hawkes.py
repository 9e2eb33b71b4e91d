"""
Recovering Hawkes parameters
============================

Simulate a day of market and limit arrivals with market orders exciting
limit orders, fit it back by maximum likelihood, and check the fit with
time-changed residuals, which should look like unit exponentials.
"""
from scipy import stats

from hawkeslob import VARIANTS, fit_mle, simulate
from hawkeslob.hawkes import LIMIT, MARKET, residuals, with_kernel

truth = VARIANTS["MM+LM"]
stream = simulate(truth, 86_400.0, seed=0)
print(f"{stream.count(MARKET)} market and {stream.count(LIMIT)} limit events")

fit = fit_mle(stream, "MM+LM")
print(f"converged: {fit.converged} after {fit.evaluations} likelihood evaluations\n")
print(f"{'param':<9} {'true':>7} {'fitted':>8}")
for key, value in truth.to_dict().items():
    if value is not None:
        print(f"{key:<9} {value:>7.3f} {fit.spec.to_dict()[key]:>8.3f}")

print("\nKS p-value of residuals against Exp(1):")
for name, comp in (("market", MARKET), ("limit", LIMIT)):
    print(f"  fitted model, {name:<6} {stats.kstest(residuals(fit.spec, stream, comp), 'expon').pvalue:.3f}")

# a deliberately wrong decay rate is caught by the same test
wrong = with_kernel(fit.spec, "MM", beta=fit.spec.kernel_MM.beta / 2)
print(f"  MM decay halved, market {stats.kstest(residuals(wrong, stream, MARKET), 'expon').pvalue:.2e}")
