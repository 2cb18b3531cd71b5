// Whole pipeline on a small semi-sphere: sample, embed, train the
// autoencoder, fit a curve and compare it with the great circle.
//
//   ./semisphere_geodesic [config.json]

#include <iostream>

#include "mgeo/mgeo.hpp"

int main(int argc, char** argv) {
  using namespace mgeo;
  RunConfig cfg;
  if (argc > 1) {
    cfg = load_run_config(argv[1]);
  } else {
    // Small enough to finish in a few seconds.
    cfg.data.n = 600;
    cfg.ae.epochs = 150;
    cfg.curve.epochs = 500;
  }
  const RunResult r = run_pipeline(cfg);
  std::cout << "endpoints " << r.i0 << " -> " << r.i1 << "\n"
            << "AE reconstruction RMSE " << r.ae.reconstruction_rmse << "\n"
            << run_report(cfg, r)["report"].dump(2) << "\n";
}
