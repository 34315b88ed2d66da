#pragma once

#include <filesystem>
#include <stdexcept>

#include "spikepool/network.hpp"

namespace spikepool {

struct BundleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes a weight bundle: a JSON manifest at `manifest_path` (layer order,
/// names, shapes, matrix offsets) plus a sibling data file of the matrices
/// as row-major little-endian 64-bit floats.
void save_bundle(const LayerGraph& graph,
                 const std::filesystem::path& manifest_path);

/// Reads a bundle back, validating the manifest against the data file and
/// the layer shape chain. Throws BundleError naming the offending layer.
LayerGraph load_bundle(const std::filesystem::path& manifest_path);

}  // namespace spikepool
