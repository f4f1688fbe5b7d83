#include "bandgraph/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "bandgraph/errors.hpp"

namespace fs = std::filesystem;

namespace bandgraph {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& cell, int row, int col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        while (pos < cell.size() &&
               (cell[pos] == ' ' || cell[pos] == '\t' || cell[pos] == '\r'))
            ++pos;
        if (pos != cell.size()) throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception&) {
        std::ostringstream os;
        os << "non-numeric cell at row " << row << ", column " << col << ": '"
           << cell << "'";
        throw IoError(os.str());
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

SpectraDataset load_spectra(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IoError("load_spectra: cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    const bool labeled = !opts.label_filter.empty();
    std::vector<double> grid;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        const int offset = labeled ? 1 : 0;
        if (static_cast<int>(cells.size()) <= offset)
            throw IoError("load_spectra: empty data row " + std::to_string(lineno));
        if (grid.empty()) {
            grid.reserve(cells.size() - offset);
            for (std::size_t c = offset; c < cells.size(); ++c)
                grid.push_back(parse_double(cells[c], lineno, static_cast<int>(c) + 1));
            continue;
        }
        if (labeled && cells[0] != opts.label_filter) continue;
        if (cells.size() != grid.size() + offset) {
            std::ostringstream os;
            os << "load_spectra: ragged row " << lineno << " (expected "
               << grid.size() + offset << " cells, got " << cells.size() << ")";
            throw IoError(os.str());
        }
        std::vector<double> row;
        row.reserve(grid.size());
        for (std::size_t c = offset; c < cells.size(); ++c)
            row.push_back(parse_double(cells[c], lineno, static_cast<int>(c) + 1));
        rows.push_back(std::move(row));
    }
    if (grid.empty()) throw IoError("load_spectra: missing grid header row");
    if (rows.empty()) throw IoError("load_spectra: no curves in '" + path + "'");

    SpectraDataset data;
    data.grid = std::move(grid);
    data.curves.resize(static_cast<int>(rows.size()),
                       static_cast<int>(data.grid.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t l = 0; l < rows[i].size(); ++l)
            data.curves(static_cast<int>(i), static_cast<int>(l)) = rows[i][l];

    try {
        data.validate();
    } catch (const Error& e) {
        throw IoError(std::string("load_spectra: ") + e.what());
    }
    if (opts.normalize_area) normalize_area(data);
    return data;
}

void save_spectra(const std::string& path, const SpectraDataset& data) {
    std::ofstream out(path);
    if (!out) throw IoError("save_spectra: cannot write '" + path + "'");
    for (int l = 0; l < data.n_points(); ++l) {
        if (l) out << ",";
        out << fmt17(data.grid[l]);
    }
    out << "\n";
    for (int i = 0; i < data.n_curves(); ++i) {
        for (int l = 0; l < data.n_points(); ++l) {
            if (l) out << ",";
            out << fmt17(data.curves(i, l));
        }
        out << "\n";
    }
}

void normalize_area(SpectraDataset& data) {
    data.validate();
    for (int i = 0; i < data.n_curves(); ++i) {
        double area = 0.0;
        for (int l = 0; l + 1 < data.n_points(); ++l)
            area += 0.5 * (data.curves(i, l) + data.curves(i, l + 1)) *
                    (data.grid[l + 1] - data.grid[l]);
        if (!(std::abs(area) > 0.0))
            throw NumericError("normalize_area: curve " + std::to_string(i + 1) +
                               " has zero area");
        data.curves.row(i) /= area;
    }
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw IoError("write_matrix_csv: cannot write '" + path + "'");
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << fmt17(m(i, j));
        }
        out << "\n";
    }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_matrix_csv: cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            row.push_back(parse_double(cells[c], lineno, static_cast<int>(c) + 1));
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("read_matrix_csv: ragged row " + std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("read_matrix_csv: empty file '" + path + "'");
    Eigen::MatrixXd m(static_cast<int>(rows.size()),
                      static_cast<int>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return m;
}

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v) {
    std::ofstream out(path);
    if (!out) throw IoError("write_vector_csv: cannot write '" + path + "'");
    for (int i = 0; i < v.size(); ++i) out << fmt17(v[i]) << "\n";
}

void write_chain_dir(const std::string& dir, const WeightedChain& chain) {
    if (chain.n_saved == 0)
        throw InputError("write_chain_dir: chain holds no saved sweeps");
    fs::create_directories(dir);

    {
        nlohmann::json meta;
        meta["p"] = chain.p;
        meta["n_saved"] = chain.n_saved;
        meta["n_omegas"] = chain.omegas.size();
        meta["tau2_mean"] = chain.tau2_mean;
        std::ofstream out(fs::path(dir) / "chain.json");
        if (!out) throw IoError("write_chain_dir: cannot write chain.json");
        out << meta.dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "tau2.csv");
        out << "iteration,tau2,log_post\n";
        for (long t = 0; t < chain.n_saved; ++t)
            out << t << "," << fmt17(chain.tau2[t]) << ","
                << fmt17(chain.log_post[t]) << "\n";
    }
    {
        // First saved graph in full, then one add/remove event per row.
        std::ofstream g0(fs::path(dir) / "graph0.edgelist");
        write_edge_list(g0, graph_from_bits(chain.p, chain.graphs.front()));

        std::ofstream out(fs::path(dir) / "edges.csv");
        out << "iteration,weight,hash,event\n";
        Graph prev = graph_from_bits(chain.p, chain.graphs.front());
        for (long t = 0; t < chain.n_saved; ++t) {
            std::string event;
            if (t > 0) {
                const Graph cur = graph_from_bits(chain.p, chain.graphs[t]);
                for (int j = 0; j < chain.p && event.empty(); ++j)
                    for (int k = j + 1; k < chain.p; ++k) {
                        if (cur.has_edge(j, k) == prev.has_edge(j, k)) continue;
                        std::ostringstream ev;
                        ev << (cur.has_edge(j, k) ? '+' : '-') << j + 1 << ":"
                           << k + 1;
                        event += (event.empty() ? "" : ";") + ev.str();
                    }
                prev = cur;
            }
            out << t << "," << fmt17(chain.weights[t]) << ","
                << chain.graph_hashes[t] << "," << event << "\n";
        }
    }
    {
        std::ofstream out(fs::path(dir) / "omega.bin", std::ios::binary);
        if (!out) throw IoError("write_chain_dir: cannot write omega.bin");
        const std::int64_t count = static_cast<std::int64_t>(chain.omegas.size());
        const std::int64_t p = chain.p;
        out.write(reinterpret_cast<const char*>(&count), sizeof(count));
        out.write(reinterpret_cast<const char*>(&p), sizeof(p));
        for (std::size_t m = 0; m < chain.omegas.size(); ++m) {
            const std::int64_t iter = chain.omega_iters[m];
            out.write(reinterpret_cast<const char*>(&iter), sizeof(iter));
            out.write(reinterpret_cast<const char*>(chain.omegas[m].data()),
                      sizeof(double) * chain.p * chain.p);
        }
    }
    write_matrix_csv((fs::path(dir) / "beta_mean.csv").string(), chain.beta_mean);
    write_vector_csv((fs::path(dir) / "mu_mean.csv").string(), chain.mu_mean);
}

namespace {

// One or more "+j:k"/"-j:k" tokens separated by ';'.
void apply_events(Graph& g, const std::string& event) {
    std::istringstream es(event);
    std::string tok;
    while (std::getline(es, tok, ';')) {
        if (tok.empty()) continue;
        const char op = tok[0];
        const std::size_t colon = tok.find(':');
        if ((op != '+' && op != '-') || colon == std::string::npos)
            throw IoError("edges.csv: malformed event '" + tok + "'");
        const int j = std::stoi(tok.substr(1, colon - 1)) - 1;
        const int k = std::stoi(tok.substr(colon + 1)) - 1;
        if (op == '+')
            g.add_edge(j, k);
        else
            g.remove_edge(j, k);
    }
}

}  // namespace

WeightedChain read_chain_dir(const std::string& dir) {
    WeightedChain chain;
    {
        std::ifstream in(fs::path(dir) / "chain.json");
        if (!in) throw IoError("read_chain_dir: missing chain.json in '" + dir + "'");
        nlohmann::json meta = nlohmann::json::parse(in, nullptr, true, true);
        chain.p = meta.at("p").get<int>();
        chain.n_saved = meta.at("n_saved").get<long>();
        chain.tau2_mean = meta.at("tau2_mean").get<double>();
    }
    {
        std::ifstream in(fs::path(dir) / "tau2.csv");
        if (!in) throw IoError("read_chain_dir: missing tau2.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = split_csv_line(line);
            if (cells.size() != 3) throw IoError("read_chain_dir: bad tau2.csv row");
            chain.tau2.push_back(std::stod(cells[1]));
            chain.log_post.push_back(std::stod(cells[2]));
        }
    }
    {
        std::ifstream g0(fs::path(dir) / "graph0.edgelist");
        if (!g0) throw IoError("read_chain_dir: missing graph0.edgelist");
        Graph g = read_edge_list(g0, chain.p);

        std::ifstream in(fs::path(dir) / "edges.csv");
        if (!in) throw IoError("read_chain_dir: missing edges.csv");
        std::string line;
        std::getline(in, line);
        long t = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = split_csv_line(line);
            if (cells.size() < 3) throw IoError("read_chain_dir: bad edges.csv row");
            const std::string event = cells.size() > 3 ? cells[3] : "";
            if (t > 0) apply_events(g, event);
            chain.weights.push_back(std::stod(cells[1]));
            chain.graph_hashes.push_back(std::stoull(cells[2]));
            if (g.hash() != chain.graph_hashes.back())
                throw IoError("read_chain_dir: graph hash mismatch at row " +
                              std::to_string(t));
            chain.graphs.push_back(g.edge_bits());
            chain.n_edges.push_back(g.n_edges());
            ++t;
        }
        if (t != chain.n_saved)
            throw IoError("read_chain_dir: edges.csv row count mismatch");
    }
    {
        std::ifstream in(fs::path(dir) / "omega.bin", std::ios::binary);
        if (!in) throw IoError("read_chain_dir: missing omega.bin");
        std::int64_t count = 0, p = 0;
        in.read(reinterpret_cast<char*>(&count), sizeof(count));
        in.read(reinterpret_cast<char*>(&p), sizeof(p));
        if (!in || p != chain.p) throw IoError("read_chain_dir: corrupt omega.bin");
        for (std::int64_t m = 0; m < count; ++m) {
            std::int64_t iter = 0;
            in.read(reinterpret_cast<char*>(&iter), sizeof(iter));
            Eigen::MatrixXd omega(chain.p, chain.p);
            in.read(reinterpret_cast<char*>(omega.data()),
                    sizeof(double) * chain.p * chain.p);
            if (!in) throw IoError("read_chain_dir: truncated omega.bin");
            chain.omega_iters.push_back(iter);
            chain.omegas.push_back(std::move(omega));
        }
    }
    chain.beta_mean = read_matrix_csv((fs::path(dir) / "beta_mean.csv").string());
    chain.mu_mean = read_matrix_csv((fs::path(dir) / "mu_mean.csv").string());
    return chain;
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("config: expected key = value on line " +
                             std::to_string(lineno));
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (!set_config_key(cfg, key, value))
            throw InputError("config: unknown key '" + key + "' on line " +
                             std::to_string(lineno));
    }
}

bool set_config_key(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
    auto as_long = [&]() { return std::stol(value); };
    auto as_int = [&]() { return std::stoi(value); };
    auto as_double = [&]() { return std::stod(value); };
    auto as_bool = [&]() {
        if (value == "true" || value == "1" || value == "yes") return true;
        if (value == "false" || value == "0" || value == "no") return false;
        throw InputError("config: expected boolean for '" + key + "'");
    };
    try {
        if (key == "out") cfg.out_dir = value;
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "iters") cfg.iters = as_long();
        else if (key == "burnin") cfg.burnin = as_long();
        else if (key == "thin") cfg.thin = as_int();
        else if (key == "max-rate") cfg.max_rate = as_double();
        else if (key == "exact-prior-ratio") cfg.exact_prior_ratio = as_bool();
        else if (key == "chains") cfg.chains = as_int();
        else if (key == "jobs") cfg.jobs = as_int();
        else if (key == "p-basis") cfg.p_basis = as_int();
        else if (key == "gw-d") cfg.gw_d = as_double();
        else if (key == "gw-D-scale") cfg.gw_d_scale = as_double();
        else if (key == "graph-prior") cfg.graph_prior = value;
        else if (key == "sigma-mu2") cfg.sigma_mu2 = as_double();
        else if (key == "a") cfg.a = as_double();
        else if (key == "b") cfg.b = as_double();
        else if (key == "select") cfg.select = value;
        else if (key == "data") cfg.data_path = value;
        else if (key == "normalize") cfg.normalize = as_bool();
        else if (key == "label-filter") cfg.label_filter = value;
        else if (key == "experiment") cfg.experiment = value;
        else if (key == "sim-n") cfg.sim_n = as_int();
        else if (key == "sim-r") cfg.sim_r = as_int();
        else if (key == "sparsity") cfg.sim_sparsity = as_double();
        else if (key == "sim-tau2") cfg.sim_tau2 = as_double();
        else if (key == "blocks") cfg.sim_blocks = as_int();
        else if (key == "replicates") cfg.replicates = as_int();
        else if (key == "freeze-truth") cfg.freeze_truth = as_bool();
        else if (key == "gp-var") cfg.gp_var = as_double();
        else if (key == "gp-rho") cfg.gp_rho = as_double();
        else if (key == "gp-nu") cfg.gp_nu = as_double();
        else if (key == "gp-mean-amp") cfg.gp_mean_amp = as_double();
        else if (key == "gp-mean-freq") cfg.gp_mean_freq = as_double();
        else if (key == "domain-lo") cfg.domain_lo = as_double();
        else if (key == "domain-hi") cfg.domain_hi = as_double();
        else return false;
    } catch (const InputError&) {
        throw;
    } catch (const std::exception&) {
        throw InputError("config: invalid value '" + value + "' for '" + key + "'");
    }
    return true;
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* env = std::getenv("BANDGRAPH_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw InputError("BANDGRAPH_SEED: invalid seed '" + std::string(env) +
                             "'");
        }
    }
}

GraphPrior parse_graph_prior(const std::string& text) {
    if (text == "uniform") return GraphPrior::uniform();
    const std::string prefix = "bernoulli=";
    if (text.rfind(prefix, 0) == 0) {
        double theta = 0.0;
        try {
            theta = std::stod(text.substr(prefix.size()));
        } catch (const std::exception&) {
            throw InputError("graph-prior: invalid theta in '" + text + "'");
        }
        if (!(theta > 0.0 && theta < 1.0))
            throw InputError("graph-prior: theta must lie in (0,1)");
        return GraphPrior::bernoulli(theta);
    }
    throw InputError("graph-prior: expected 'uniform' or 'bernoulli=theta', got '" +
                     text + "'");
}

SelectRule parse_select_rule(const std::string& text) {
    SelectRule rule;
    if (text == "median") {
        rule.median = true;
        return rule;
    }
    if (text == "bfdr") return rule;
    const std::string prefix = "bfdr=";
    if (text.rfind(prefix, 0) == 0) {
        try {
            rule.alpha = std::stod(text.substr(prefix.size()));
        } catch (const std::exception&) {
            throw InputError("select: invalid alpha in '" + text + "'");
        }
        if (!(rule.alpha > 0.0 && rule.alpha <= 1.0))
            throw InputError("select: alpha must lie in (0,1]");
        return rule;
    }
    throw InputError("select: expected 'median' or 'bfdr=alpha', got '" + text +
                     "'");
}

}  // namespace bandgraph
