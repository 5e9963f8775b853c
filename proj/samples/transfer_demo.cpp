// Transfers positional encodings from Zachary's karate club to a 17-node
// neighbourhood of node 0 and reports the error for a few basis sizes.
#include <iostream>

#include "specmap/specmap.hpp"

int main() {
  using namespace specmap;
  const Graph g = datasets::karate();
  const Subgraph sub = khop_subgraph(g, NodeId("0"), 17);
  const SignalMatrix f = normalize_signal(rw_positional_encoding(g));

  SignalMatrix reference(static_cast<Eigen::Index>(sub.graph.num_nodes()), f.cols());
  for (NodeIndex y = 0; y < sub.graph.num_nodes(); ++y) {
    reference.row(static_cast<Eigen::Index>(y)) = f.row(static_cast<Eigen::Index>(sub.to_parent[y]));
  }

  for (const char* spec : {"10%", "25%", "50%", "75%", "100%"}) {
    const EigenCount k = EigenCount::parse(spec);
    const Eigenbasis b1 = eigendecompose(g, k);
    const Eigenbasis b2 = eigendecompose(sub.graph, k);
    const SpectralMap c = compute_spectral_map(sub.to_parent, b1, b2);
    const double err = rmse(reference, transfer_signal(c, b1, b2, f));
    const double map = mean_average_precision(recover_node_map(c, b1, b2), sub.to_parent);
    std::cout << "k=" << spec << " (" << b1.k() << "x" << b2.k() << ")  rmse " << err << "  matching MAP " << map << '\n';
  }
}
