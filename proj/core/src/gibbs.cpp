#include "bandgraph/gibbs.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "bandgraph/errors.hpp"

namespace bandgraph {

void SpectraDataset::validate() const {
    if (curves.rows() < 1) throw InputError("SpectraDataset: need n >= 1 curves");
    if (static_cast<int>(grid.size()) < 2)
        throw InputError("SpectraDataset: need r >= 2 grid points");
    if (curves.cols() != static_cast<int>(grid.size()))
        throw InputError("SpectraDataset: curves/grid dimension mismatch");
    for (std::size_t l = 1; l < grid.size(); ++l)
        if (!(grid[l] > grid[l - 1]))
            throw InputError("SpectraDataset: grid must be strictly ascending");
    if (!curves.allFinite())
        throw InputError("SpectraDataset: curves contain non-finite values");
}

void Hyperparameters::validate() const {
    basis.validate();
    gw_prior.validate(basis.n_basis);
    graph_prior.validate(basis.n_basis);
    if (!(sigma_mu2 > 0.0)) throw InputError("Hyperparameters: sigma_mu2 must be > 0");
    if (!(a > 0.0) || !(b > 0.0))
        throw InputError("Hyperparameters: a and b must be > 0");
}

void SamplerControls::validate() const {
    if (burn_in < 0 || n_iter <= burn_in)
        throw InputError("SamplerControls: need n_iter > burn_in >= 0");
    if (thin_omega < 1) throw InputError("SamplerControls: thin_omega must be >= 1");
    if (!(max_rate > 0.0))
        throw InputError("SamplerControls: max_rate must be > 0");
    if (norm_const_samples < 1000)
        throw InputError("SamplerControls: norm_const_samples must be >= 1000");
}

Graph graph_from_bits(int p, const std::vector<std::uint64_t>& bits) {
    Graph g(p);
    int idx = 0;
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k, ++idx)
            if (bits[idx / 64] & (std::uint64_t{1} << (idx % 64))) g.add_edge(j, k);
    return g;
}

SamplerWorkspace::SamplerWorkspace(const DesignMatrix& design,
                                   const Eigen::MatrixXd& curves) {
    phi = design.values;
    r = static_cast<int>(phi.rows());
    p = static_cast<int>(phi.cols());
    n = static_cast<int>(curves.rows());
    if (curves.cols() != r)
        throw InputError("SamplerWorkspace: curves/design dimension mismatch");
    phi_t_phi = phi.transpose() * phi;
    phi_t_y = phi.transpose() * curves.transpose();  // p x n
    y_sqnorm = curves.rowwise().squaredNorm();
}

void update_betas(McmcState& state, const SamplerWorkspace& ws, Rng& rng) {
    if (!(state.tau2 > 0.0)) throw NumericError("update_betas: tau2 must be > 0");
    const Eigen::MatrixXd prec =
        ws.phi_t_phi / state.tau2 + state.bd.omega.values;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
        throw NumericError("update_betas: conditional precision not positive definite");

    const Eigen::VectorXd omega_mu = state.bd.omega.values * state.mu;
    Eigen::VectorXd z(ws.p);
    for (int i = 0; i < ws.n; ++i) {
        const Eigen::VectorXd rhs = ws.phi_t_y.col(i) / state.tau2 + omega_mu;
        const Eigen::VectorXd mean = llt.solve(rhs);
        for (int j = 0; j < ws.p; ++j) z[j] = draw_normal(rng);
        // mean + L^{-T} z has covariance prec^{-1}
        state.betas.row(i) =
            (mean + llt.matrixL().transpose().solve(z)).transpose();
    }
}

void update_mu(McmcState& state, double sigma_mu2, Rng& rng) {
    const int p = static_cast<int>(state.mu.size());
    const int n = static_cast<int>(state.betas.rows());
    const Eigen::MatrixXd prec =
        Eigen::MatrixXd::Identity(p, p) / sigma_mu2 + n * state.bd.omega.values;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
        throw NumericError("update_mu: conditional precision not positive definite");
    const Eigen::VectorXd rhs =
        state.bd.omega.values * state.betas.colwise().sum().transpose();
    const Eigen::VectorXd mean = llt.solve(rhs);
    Eigen::VectorXd z(p);
    for (int j = 0; j < p; ++j) z[j] = draw_normal(rng);
    state.mu = mean + llt.matrixL().transpose().solve(z);
}

void update_tau2(McmcState& state, const SamplerWorkspace& ws, double a, double b,
                 Rng& rng) {
    // ||Y_i - Phi beta_i||^2 expanded through the precomputed cross-products.
    double rss = 0.0;
    for (int i = 0; i < ws.n; ++i) {
        const Eigen::VectorXd beta = state.betas.row(i).transpose();
        rss += ws.y_sqnorm[i] - 2.0 * beta.dot(ws.phi_t_y.col(i)) +
               beta.dot(ws.phi_t_phi * beta);
    }
    rss = std::max(rss, 0.0);
    const double shape = 0.5 * (static_cast<double>(ws.n) * ws.r + a);
    const double rate = 0.5 * (b + rss);
    const double gamma = draw_gamma(rng, shape, 1.0);
    if (!(gamma > 0.0)) throw NumericError("update_tau2: degenerate gamma draw");
    state.tau2 = rate / gamma;
}

Eigen::MatrixXd coefficient_scatter(const Eigen::MatrixXd& betas,
                                    const Eigen::VectorXd& mu) {
    const Eigen::MatrixXd centered = betas.rowwise() - mu.transpose();
    return centered.transpose() * centered;
}

namespace {

double log_joint_proxy(const PrecisionMatrix& omega, const PosteriorGwParams& post,
                       const GraphPrior& prior) {
    Eigen::LLT<Eigen::MatrixXd> llt(omega.values);
    if (llt.info() != Eigen::Success)
        throw NumericError("run_chain: omega not positive definite");
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double trace = omega.values.cwiseProduct(post.inv_scale).sum();
    return 0.5 * (post.shape - 2.0) * logdet - 0.5 * trace +
           log_prior(prior, omega.graph);
}

}  // namespace

WeightedChain run_chain(const SpectraDataset& data, const Hyperparameters& hp,
                        const SamplerControls& ctrl, Rng& rng) {
    data.validate();
    hp.validate();
    ctrl.validate();
    const int p = hp.basis.n_basis;
    const int n = data.n_curves();

    const DesignMatrix design = build_design(hp.basis, data.grid);
    const SamplerWorkspace ws(design, data.curves);

    // Initialization: ridge fit per curve, empty graph, identity precision.
    McmcState state;
    state.betas.resize(n, p);
    {
        const Eigen::MatrixXd ridge =
            ws.phi_t_phi + Eigen::MatrixXd::Identity(p, p);
        Eigen::LLT<Eigen::MatrixXd> llt(ridge);
        for (int i = 0; i < n; ++i)
            state.betas.row(i) = llt.solve(ws.phi_t_y.col(i)).transpose();
    }
    state.mu = state.betas.colwise().mean().transpose();
    {
        double rss = 0.0;
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd beta = state.betas.row(i).transpose();
            rss += ws.y_sqnorm[i] - 2.0 * beta.dot(ws.phi_t_y.col(i)) +
                   beta.dot(ws.phi_t_phi * beta);
        }
        state.tau2 = std::max(rss / (static_cast<double>(n) * ws.r), 1e-8);
    }
    state.bd.omega.graph = Graph(p);
    state.bd.omega.values = Eigen::MatrixXd::Identity(p, p);
    state.bd.weight = 1.0;

    NormConstCache cache(hp.gw_prior, ctrl.norm_const_samples,
                         /*seed=*/0x6e7f00d5u);
    BdOptions bd_opts;
    bd_opts.max_rate = ctrl.max_rate;
    if (ctrl.exact_prior_ratio) bd_opts.prior_norm = &cache;

    WeightedChain chain;
    chain.p = p;
    const long n_keep = ctrl.n_iter - ctrl.burn_in;
    chain.graphs.reserve(n_keep);
    chain.weights.reserve(n_keep);
    chain.tau2.reserve(n_keep);
    chain.beta_mean = Eigen::MatrixXd::Zero(n, p);
    chain.mu_mean = Eigen::VectorXd::Zero(p);

    for (long t = 0; t < ctrl.n_iter; ++t) {
        try {
            update_betas(state, ws, rng);
            update_mu(state, hp.sigma_mu2, rng);
            update_tau2(state, ws, hp.a, hp.b, rng);

            PosteriorGwParams post;
            post.shape = hp.gw_prior.shape + n;
            post.inv_scale =
                hp.gw_prior.inv_scale + coefficient_scatter(state.betas, state.mu);

            // The recorded sample of sweep t is the visited (post-refresh,
            // pre-jump) state together with its expected holding time.
            PrecisionMatrix visited;
            double weight = 1.0;
            if (ctrl.fix_graph) {
                state.bd.omega =
                    sample_direct(post.as_gwishart(), state.bd.graph(), rng);
                state.bd.weight = 1.0;
                visited = state.bd.omega;
            } else {
                BdStepReport report;
                state.bd = birth_death_step(state.bd, post, hp.graph_prior, rng,
                                            bd_opts, &report);
                weight = report.weight;
                visited = std::move(report.visited);
            }

            if (t >= ctrl.burn_in) {
                chain.graphs.push_back(visited.graph.edge_bits());
                chain.n_edges.push_back(visited.graph.n_edges());
                chain.graph_hashes.push_back(visited.graph.hash());
                chain.weights.push_back(weight);
                chain.tau2.push_back(state.tau2);
                chain.log_post.push_back(
                    log_joint_proxy(visited, post, hp.graph_prior));
                if (chain.n_saved % ctrl.thin_omega == 0) {
                    chain.omega_iters.push_back(chain.n_saved);
                    chain.omegas.push_back(visited.values);
                }
                ++chain.n_saved;
                const double inv = 1.0 / static_cast<double>(chain.n_saved);
                chain.beta_mean += (state.betas - chain.beta_mean) * inv;
                chain.mu_mean += (state.mu - chain.mu_mean) * inv;
                chain.tau2_mean += (state.tau2 - chain.tau2_mean) * inv;
            }
        } catch (const Error& e) {
            std::ostringstream os;
            os << e.what() << " (sweep " << t << ")";
            throw NumericError(os.str());
        }
    }
    return chain;
}

WeightedChain pool_chains(const std::vector<WeightedChain>& chains) {
    if (chains.empty()) throw InputError("pool_chains: no chains");
    if (chains.size() == 1) return chains.front();
    WeightedChain pooled;
    pooled.p = chains.front().p;
    const int n = static_cast<int>(chains.front().beta_mean.rows());
    pooled.beta_mean = Eigen::MatrixXd::Zero(n, pooled.p);
    pooled.mu_mean = Eigen::VectorXd::Zero(pooled.p);
    for (const auto& c : chains) {
        if (c.p != pooled.p || c.n_saved != chains.front().n_saved)
            throw InputError("pool_chains: chains are not homogeneous");
        const long offset = pooled.n_saved;
        pooled.graphs.insert(pooled.graphs.end(), c.graphs.begin(), c.graphs.end());
        pooled.n_edges.insert(pooled.n_edges.end(), c.n_edges.begin(),
                              c.n_edges.end());
        pooled.graph_hashes.insert(pooled.graph_hashes.end(),
                                   c.graph_hashes.begin(), c.graph_hashes.end());
        pooled.weights.insert(pooled.weights.end(), c.weights.begin(),
                              c.weights.end());
        pooled.tau2.insert(pooled.tau2.end(), c.tau2.begin(), c.tau2.end());
        pooled.log_post.insert(pooled.log_post.end(), c.log_post.begin(),
                               c.log_post.end());
        for (std::size_t m = 0; m < c.omegas.size(); ++m) {
            pooled.omega_iters.push_back(c.omega_iters[m] + offset);
            pooled.omegas.push_back(c.omegas[m]);
        }
        pooled.n_saved += c.n_saved;
        pooled.beta_mean += c.beta_mean;
        pooled.mu_mean += c.mu_mean;
        pooled.tau2_mean += c.tau2_mean;
    }
    const double k = static_cast<double>(chains.size());
    pooled.beta_mean /= k;
    pooled.mu_mean /= k;
    pooled.tau2_mean /= k;
    return pooled;
}

}  // namespace bandgraph
