#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mrfcox {

/**
 * Edge weights of the prior graph on the p covariates. The matrix is kept
 * symmetric with a zero diagonal and nonnegative entries; every operation
 * below preserves that.
 */
class PriorGraph {
public:
    PriorGraph() = default;
    explicit PriorGraph(Eigen::MatrixXd weights);

    Eigen::Index p() const { return weights_.rows(); }
    const Eigen::MatrixXd& weights() const { return weights_; }
    double weight(Eigen::Index i, Eigen::Index j) const { return weights_(i, j); }

    void set_edge(Eigen::Index i, Eigen::Index j, double w);

    friend bool operator==(const PriorGraph& a, const PriorGraph& b) {
        return a.weights_ == b.weights_;
    }

private:
    Eigen::MatrixXd weights_;
};

PriorGraph empty_graph(Eigen::Index p);

/// Unit-weight edge wherever an off-diagonal precision entry exceeds `tol`
/// in magnitude.
PriorGraph from_precision_pattern(const Eigen::MatrixXd& omega, double tol = 1e-8);

/// Keeps edges whose 1-based position in the row-major upper-triangle
/// enumeration is congruent to 1 modulo k.
PriorGraph remove_edges_uniform(const PriorGraph& g, int k);

/// Zeroes within-block edges, or whole rows and columns of the block when
/// `disconnect` is set. Block indices are 0-based.
PriorGraph remove_block_edges(const PriorGraph& g, const std::vector<Eigen::Index>& block,
                              bool disconnect);

/// Adds round-half-up(fraction * edge_count(g)) distinct unit-weight edges
/// drawn uniformly among current non-edges.
PriorGraph add_false_edges(const PriorGraph& g, double fraction, std::uint64_t seed);

std::size_t edge_count(const PriorGraph& g);

/// Edge-list text: a `p=<dim>` header then `i j weight` lines, 1-based, i < j.
void write_graph(const PriorGraph& g, const std::filesystem::path& path);
PriorGraph read_graph(const std::filesystem::path& path);

} // namespace mrfcox
