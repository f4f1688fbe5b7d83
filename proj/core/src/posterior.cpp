#include "bandgraph/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bandgraph/errors.hpp"

namespace bandgraph {

Eigen::MatrixXd omega_hat(const WeightedChain& chain) {
    if (chain.omegas.empty())
        throw InputError("omega_hat: chain stores no Omega samples");
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(chain.p, chain.p);
    double total = 0.0;
    for (std::size_t m = 0; m < chain.omegas.size(); ++m) {
        const double w = chain.weights[chain.omega_iters[m]];
        acc += w * chain.omegas[m];
        total += w;
    }
    if (!(total > 0.0)) throw NumericError("omega_hat: total weight is zero");
    return acc / total;
}

EdgeProbMatrix edge_probs(const WeightedChain& chain) {
    if (chain.n_saved == 0) throw InputError("edge_probs: empty chain");
    const int p = chain.p;
    EdgeProbMatrix probs;
    probs.values = Eigen::MatrixXd::Zero(p, p);
    double total = 0.0;
    for (long t = 0; t < chain.n_saved; ++t) {
        const double w = chain.weights[t];
        total += w;
        const auto& bits = chain.graphs[t];
        int idx = 0;
        for (int j = 0; j < p; ++j)
            for (int k = j + 1; k < p; ++k, ++idx)
                if (bits[idx / 64] & (std::uint64_t{1} << (idx % 64)))
                    probs.values(j, k) += w;
    }
    if (!(total > 0.0)) throw NumericError("edge_probs: total weight is zero");
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) {
            probs.values(j, k) /= total;
            probs.values(k, j) = probs.values(j, k);
        }
    return probs;
}

Graph select_median_graph(const EdgeProbMatrix& probs) {
    const int p = probs.n_nodes();
    Graph g(p);
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k)
            if (probs.values(j, k) > 0.5) g.add_edge(j, k);
    return g;
}

double bfdr_at(const EdgeProbMatrix& probs, double s) {
    const int p = probs.n_nodes();
    double doubt = 0.0;
    int included = 0;
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k)
            if (probs.values(j, k) >= s) {
                doubt += 1.0 - probs.values(j, k);
                ++included;
            }
    return included == 0 ? 0.0 : doubt / included;
}

BfdrSelection select_bfdr_graph(const EdgeProbMatrix& probs, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0) && alpha != 1.0)
        throw InputError("select_bfdr_graph: alpha must lie in (0,1]");
    const int p = probs.n_nodes();

    std::vector<double> candidates;
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) candidates.push_back(probs.values(j, k));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    BfdrSelection sel;
    sel.graph = Graph(p);
    sel.threshold = 1.0;
    // Smallest s whose included set keeps the false discovery share under
    // alpha gives the most inclusive qualifying graph.
    for (double s : candidates) {
        if (bfdr_at(probs, s) < alpha) {
            sel.threshold = s;
            for (int j = 0; j < p; ++j)
                for (int k = j + 1; k < p; ++k)
                    if (probs.values(j, k) >= s) sel.graph.add_edge(j, k);
            return sel;
        }
    }
    return sel;
}

Eigen::MatrixXd smooth_estimates(const WeightedChain& chain,
                                 const DesignMatrix& design) {
    if (chain.n_saved == 0) throw InputError("smooth_estimates: empty chain");
    if (design.n_basis() != chain.p)
        throw InputError("smooth_estimates: design/chain dimension mismatch");
    return chain.beta_mean * design.values.transpose();
}

PosteriorSummary summarize(const WeightedChain& chain, const DesignMatrix& design,
                           double alpha) {
    PosteriorSummary s;
    s.omega_hat = omega_hat(chain);
    s.edge_probs = edge_probs(chain);
    s.median_graph = select_median_graph(s.edge_probs);
    s.bfdr = select_bfdr_graph(s.edge_probs, alpha);
    s.beta_hat = chain.beta_mean;
    s.mu_hat = chain.mu_mean;
    s.tau2_hat = chain.tau2_mean;
    s.fitted = smooth_estimates(chain, design);
    return s;
}

}  // namespace bandgraph
