#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bandgraph {

/// n curves observed on a shared ascending grid of r points.
/// curves(i, l) is curve i at grid point l.
struct SpectraDataset {
    std::vector<double> grid;
    Eigen::MatrixXd curves;

    int n_curves() const { return static_cast<int>(curves.rows()); }
    int n_points() const { return static_cast<int>(grid.size()); }

    void validate() const;
};

}  // namespace bandgraph
