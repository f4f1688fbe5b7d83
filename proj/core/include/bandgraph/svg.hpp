#pragma once

#include <Eigen/Dense>
#include <string>

namespace bandgraph {

/// Rect-grid heatmap, no external renderer. `diverging` uses a symmetric
/// blue-white-red scale around zero, otherwise white-to-blue over the data
/// range. `skip_diagonal` leaves the diagonal cells blank.
void write_heatmap_svg(const std::string& path, const Eigen::MatrixXd& m,
                       const std::string& title = "", bool diverging = false,
                       bool skip_diagonal = false);

}  // namespace bandgraph
