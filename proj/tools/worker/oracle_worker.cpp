/*
 * SPDX-License-Identifier: Apache-2.0
 */

// Serves the oracle provider over stdin/stdout using the NDJSON worker
// protocol. Lets the worker transport be exercised without the sidecar.

#include <iostream>

#include <CLI11.hpp>

#include "boxmend/coco.hpp"
#include "boxmend/error.hpp"
#include "boxmend/provider.hpp"

int main(int argc, char** argv) {
  CLI::App app{"boxmend-oracle-worker: oracle mask provider speaking the boxmend/1 protocol on stdio"};
  std::string truth_path;
  boxmend::OracleFidelity fidelity;
  double temperature = boxmend::kDefaultLabelTemperature;
  app.add_option("--truth", truth_path, "COCO file with instance masks")->required();
  app.add_option("--jitter", fidelity.boundary_jitter, "boundary jitter in pixels")->capture_default_str();
  app.add_option("--part-prob", fidelity.part_mask_prob, "part-mask probability")->capture_default_str();
  app.add_option("--leak-prob", fidelity.background_leak_prob, "background-leak probability")->capture_default_str();
  app.add_option("--seed", fidelity.seed, "oracle seed")->capture_default_str();
  app.add_option("--temperature", temperature, "label-score softmax temperature")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    boxmend::OracleProvider provider(boxmend::load_coco(truth_path), fidelity, temperature);
    boxmend::ProviderServer server(provider);
    std::ios::sync_with_stdio(false);
    server.serve(std::cin, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "boxmend-oracle-worker: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
