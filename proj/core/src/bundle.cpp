#include "spikepool/bundle.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

namespace spikepool {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "spikepool-bundle-v1";

void put_f64le(std::string& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

double get_f64le(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(
                static_cast<unsigned char>(in[offset + static_cast<std::size_t>(i)]))
            << (8 * i);
  }
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

json shape_to_json(const TensorShape& s) {
  return json{{"channels", s.channels},
              {"height", s.height},
              {"width", s.width},
              {"layout", s.layout == Layout::ChannelsFirst ? "channels_first"
                                                           : "channels_last"}};
}

TensorShape shape_from_json(const json& j, const std::string& where) {
  TensorShape s;
  try {
    s.channels = j.at("channels").get<std::size_t>();
    s.height = j.at("height").get<std::size_t>();
    s.width = j.at("width").get<std::size_t>();
    const std::string layout = j.at("layout").get<std::string>();
    if (layout == "channels_first") {
      s.layout = Layout::ChannelsFirst;
    } else if (layout == "channels_last") {
      s.layout = Layout::ChannelsLast;
    } else {
      throw BundleError(where + ": unknown layout '" + layout + "'");
    }
  } catch (const json::exception& e) {
    throw BundleError(where + ": bad tensor shape (" + e.what() + ")");
  }
  return s;
}

}  // namespace

void save_bundle(const LayerGraph& graph,
                 const std::filesystem::path& manifest_path) {
  graph.validate();

  const std::filesystem::path data_path =
      std::filesystem::path(manifest_path).replace_extension(".bin");

  json manifest;
  manifest["format"] = kFormatTag;
  manifest["data_file"] = data_path.filename().string();
  manifest["firing_rate_scale"] = graph.firing_rate_scale;
  manifest["rate_cap_hz"] = graph.rate_cap_hz;
  manifest["input_shape"] = shape_to_json(graph.input_shape);

  std::string blob;
  json layers = json::array();
  for (const Layer& layer : graph.layers) {
    json entry;
    if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
      entry["type"] = "linear";
      entry["name"] = lin->name;
      entry["rows"] = lin->weights.rows;
      entry["cols"] = lin->weights.cols;
      entry["offset"] = blob.size();
      entry["out_shape"] = shape_to_json(lin->out_shape);
      for (double v : lin->weights.data) put_f64le(blob, v);
    } else if (const auto* pool = std::get_if<PoolLayerSpec>(&layer)) {
      entry["type"] = "pool";
      entry["window"] = {pool->spec.window_rows, pool->spec.window_cols};
      entry["method"] = to_string(pool->spec.method);
    } else {
      const auto& out = std::get<OutputLayer>(layer);
      entry["type"] = "output";
      entry["name"] = out.name;
      entry["rows"] = out.weights.rows;
      entry["cols"] = out.weights.cols;
      entry["offset"] = blob.size();
      for (double v : out.weights.data) put_f64le(blob, v);
    }
    layers.push_back(std::move(entry));
  }
  manifest["layers"] = std::move(layers);

  {
    std::ofstream f(manifest_path);
    if (!f) throw BundleError("cannot write manifest: " + manifest_path.string());
    f << manifest.dump(2) << '\n';
    if (!f) throw BundleError("failed writing manifest: " + manifest_path.string());
  }
  {
    std::ofstream f(data_path, std::ios::binary);
    if (!f) throw BundleError("cannot write data file: " + data_path.string());
    f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!f) throw BundleError("failed writing data file: " + data_path.string());
  }
}

LayerGraph load_bundle(const std::filesystem::path& manifest_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw BundleError("cannot open manifest: " + manifest_path.string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw BundleError("manifest is not valid JSON: " + std::string(e.what()));
  }

  if (!manifest.is_object() || manifest.value("format", "") != kFormatTag) {
    throw BundleError("manifest missing format tag '" + std::string(kFormatTag) + "'");
  }

  LayerGraph graph;
  graph.firing_rate_scale = manifest.value("firing_rate_scale", 400.0);
  graph.rate_cap_hz = manifest.value("rate_cap_hz", 1000.0);
  if (!manifest.contains("input_shape") || !manifest.contains("layers") ||
      !manifest.contains("data_file")) {
    throw BundleError("manifest missing input_shape, layers, or data_file");
  }
  graph.input_shape = shape_from_json(manifest["input_shape"], "input_shape");

  const std::filesystem::path data_path =
      manifest_path.parent_path() / manifest["data_file"].get<std::string>();
  std::ifstream df(data_path, std::ios::binary);
  if (!df) throw BundleError("cannot open data file: " + data_path.string());
  std::string blob((std::istreambuf_iterator<char>(df)),
                   std::istreambuf_iterator<char>());

  const auto read_matrix = [&](const json& entry, const std::string& where) {
    Matrix m;
    m.rows = entry.at("rows").get<std::size_t>();
    m.cols = entry.at("cols").get<std::size_t>();
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t bytes = m.rows * m.cols * 8;
    if (offset + bytes > blob.size()) {
      throw BundleError(where + ": matrix extends past the end of the data file");
    }
    m.data.reserve(m.rows * m.cols);
    for (std::size_t i = 0; i < m.rows * m.cols; ++i) {
      const double v = get_f64le(blob, offset + i * 8);
      if (!std::isfinite(v)) {
        throw BundleError(where + ": non-finite weight entry");
      }
      m.data.push_back(v);
    }
    return m;
  };

  std::size_t index = 0;
  for (const json& entry : manifest["layers"]) {
    const std::string where = "layer " + std::to_string(index);
    std::string type;
    try {
      type = entry.at("type").get<std::string>();
    } catch (const json::exception&) {
      throw BundleError(where + ": missing layer type");
    }
    try {
      if (type == "linear") {
        LinearLayer lin;
        lin.name = entry.value("name", "");
        lin.weights = read_matrix(entry, where + " '" + lin.name + "'");
        lin.out_shape = shape_from_json(entry.at("out_shape"),
                                        where + " '" + lin.name + "'");
        graph.layers.emplace_back(std::move(lin));
      } else if (type == "pool") {
        PoolLayerSpec pool;
        const auto& window = entry.at("window");
        pool.spec.window_rows = window.at(0).get<std::size_t>();
        pool.spec.window_cols = window.at(1).get<std::size_t>();
        pool.spec.method = pool_method_from_string(entry.value("method", "true_max"));
        graph.layers.emplace_back(pool);
      } else if (type == "output") {
        OutputLayer out;
        out.name = entry.value("name", "");
        out.weights = read_matrix(entry, where + " '" + out.name + "'");
        graph.layers.emplace_back(std::move(out));
      } else {
        throw BundleError(where + ": unknown layer type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw BundleError(where + ": malformed entry (" + e.what() + ")");
    }
    ++index;
  }

  try {
    graph.validate();
  } catch (const std::invalid_argument& e) {
    throw BundleError(std::string("bundle does not form a valid graph: ") + e.what());
  }
  return graph;
}

}  // namespace spikepool
