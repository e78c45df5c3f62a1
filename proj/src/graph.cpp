#include "mrfcox/graph.hpp"

#include "mrfcox/datamodel.hpp"
#include "mrfcox/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace mrfcox {

using Eigen::Index;

PriorGraph::PriorGraph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
    if (weights_.rows() != weights_.cols()) {
        throw std::invalid_argument("graph weight matrix must be square");
    }
    for (Index i = 0; i < p(); ++i) {
        if (weights_(i, i) != 0.0) {
            throw std::invalid_argument("graph weight matrix must have a zero diagonal");
        }
        for (Index j = i + 1; j < p(); ++j) {
            if (weights_(i, j) != weights_(j, i)) {
                throw std::invalid_argument("graph weight matrix must be symmetric");
            }
            if (!(weights_(i, j) >= 0.0) || !std::isfinite(weights_(i, j))) {
                throw std::invalid_argument("graph weights must be finite and nonnegative");
            }
        }
    }
}

void PriorGraph::set_edge(Index i, Index j, double w) {
    if (i == j) {
        throw std::invalid_argument("self-loops are not allowed in the prior graph");
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("graph weights must be finite and nonnegative");
    }
    weights_(i, j) = w;
    weights_(j, i) = w;
}

PriorGraph empty_graph(Index p) {
    if (p < 1) {
        throw std::invalid_argument("graph dimension must be at least 1");
    }
    return PriorGraph(Eigen::MatrixXd::Zero(p, p));
}

PriorGraph from_precision_pattern(const Eigen::MatrixXd& omega, double tol) {
    if (omega.rows() != omega.cols()) {
        throw std::invalid_argument("precision matrix must be square");
    }
    const Index p = omega.rows();
    PriorGraph g = empty_graph(p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j) {
            // numerically inverted matrices are symmetric only up to rounding
            if (std::abs(omega(i, j) - omega(j, i)) > tol) {
                throw std::invalid_argument("precision matrix must be symmetric");
            }
            if (std::abs(omega(i, j)) > tol || std::abs(omega(j, i)) > tol) {
                g.set_edge(i, j, 1.0);
            }
        }
    }
    return g;
}

PriorGraph remove_edges_uniform(const PriorGraph& g, int k) {
    if (k < 2) {
        throw std::invalid_argument("uniform edge removal needs k >= 2");
    }
    PriorGraph out = g;
    std::size_t position = 0;
    for (Index i = 0; i < g.p(); ++i) {
        for (Index j = i + 1; j < g.p(); ++j) {
            if (g.weight(i, j) == 0.0) {
                continue;
            }
            ++position;
            if (position % static_cast<std::size_t>(k) != 1) {
                out.set_edge(i, j, 0.0);
            }
        }
    }
    return out;
}

PriorGraph remove_block_edges(const PriorGraph& g, const std::vector<Index>& block, bool disconnect) {
    for (const Index b : block) {
        if (b < 0 || b >= g.p()) {
            throw std::invalid_argument("block index " + std::to_string(b + 1) +
                                        " is outside 1.." + std::to_string(g.p()));
        }
    }
    PriorGraph out = g;
    for (const Index a : block) {
        if (disconnect) {
            for (Index j = 0; j < g.p(); ++j) {
                if (j != a) {
                    out.set_edge(a, j, 0.0);
                }
            }
        } else {
            for (const Index b : block) {
                if (a != b) {
                    out.set_edge(a, b, 0.0);
                }
            }
        }
    }
    return out;
}

PriorGraph add_false_edges(const PriorGraph& g, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0)) {
        throw std::invalid_argument("false-edge fraction must be positive");
    }
    const std::size_t existing = edge_count(g);
    if (existing == 0) {
        throw std::invalid_argument("cannot add false edges relative to an empty graph");
    }
    const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(existing) + 0.5));

    std::vector<std::pair<Index, Index>> candidates;
    for (Index i = 0; i < g.p(); ++i) {
        for (Index j = i + 1; j < g.p(); ++j) {
            if (g.weight(i, j) == 0.0) {
                candidates.emplace_back(i, j);
            }
        }
    }
    if (candidates.size() < m) {
        throw std::invalid_argument("only " + std::to_string(candidates.size()) +
                                    " non-edges available, cannot add " + std::to_string(m));
    }
    // partial Fisher-Yates: the first m slots become a uniform sample
    Engine rng(derive_seed(seed, 0));
    for (std::size_t s = 0; s < m; ++s) {
        const auto pick = static_cast<std::size_t>(draw_index(rng, s, candidates.size() - 1));
        std::swap(candidates[s], candidates[pick]);
    }
    PriorGraph out = g;
    for (std::size_t s = 0; s < m; ++s) {
        out.set_edge(candidates[s].first, candidates[s].second, 1.0);
    }
    return out;
}

std::size_t edge_count(const PriorGraph& g) {
    std::size_t count = 0;
    for (Index i = 0; i < g.p(); ++i) {
        for (Index j = i + 1; j < g.p(); ++j) {
            if (g.weight(i, j) != 0.0) {
                ++count;
            }
        }
    }
    return count;
}

void write_graph(const PriorGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write graph file '" + path.string() + "'");
    }
    out << "p=" << g.p() << '\n';
    char buf[64];
    for (Index i = 0; i < g.p(); ++i) {
        for (Index j = i + 1; j < g.p(); ++j) {
            const double w = g.weight(i, j);
            if (w != 0.0) {
                const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), w, std::chars_format::general, 17);
                out << (i + 1) << ' ' << (j + 1) << ' ' << std::string_view(buf, ptr - buf) << '\n';
            }
        }
    }
}

PriorGraph read_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open graph file '" + path.string() + "'");
    }
    std::string line;
    std::size_t line_no = 0;
    Index p = -1;
    while (p < 0 && std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (line.rfind("p=", 0) != 0) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": expected header 'p=<dim>'");
        }
        const char* first = line.data() + 2;
        const char* last = line.data() + line.size();
        long dim = 0;
        const auto [ptr, ec] = std::from_chars(first, last, dim);
        p = ec == std::errc() && ptr == last ? dim : 0;
        if (p < 1) {
            break;
        }
    }
    if (p < 1) {
        throw ParseError(path.string() + ": missing or invalid 'p=<dim>' header");
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        long i = 0;
        long j = 0;
        double weight = 1.0;
        if (!(fields >> i >> j)) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": expected 'i j weight'");
        }
        if (!(fields >> weight)) {
            weight = 1.0;
        }
        if (i < 1 || j < 1 || i > p || j > p || i == j) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": edge (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is out of range or a self-loop");
        }
        if (!(weight >= 0.0) || !std::isfinite(weight)) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": weight must be finite and nonnegative");
        }
        w(i - 1, j - 1) = weight;
        w(j - 1, i - 1) = weight;
    }
    return PriorGraph(std::move(w));
}

} // namespace mrfcox
