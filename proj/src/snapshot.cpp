#include "wmbind/snapshot.hpp"

#include <bit>
#include <cstring>

namespace wmbind {

using nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string wiring_name(IvWiring w) { return w == IvWiring::layer4 ? "layer4" : "layer3"; }
std::string kind_name(BrnKind k) { return k == BrnKind::random ? "random" : "lattice"; }

IvWiring parse_wiring(const std::string& s) {
  if (s == "layer4") return IvWiring::layer4;
  if (s == "layer3") return IvWiring::layer3;
  throw std::invalid_argument("iv_wiring must be layer4 or layer3, got '" + s + "'");
}

BrnKind parse_kind(const std::string& s) {
  if (s == "random") return BrnKind::random;
  if (s == "lattice") return BrnKind::lattice;
  throw std::invalid_argument("brn_kind must be random or lattice, got '" + s + "'");
}

json f64_array(std::span<const double> v, std::vector<std::size_t> shape) {
  std::string bytes(v.size() * 8, '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(v[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return json{{"dtype", "f64le"},
              {"shape", shape},
              {"data", base64_encode(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size())}};
}

json matrix_array(const Matrix& m) { return f64_array(m.data, {m.rows, m.cols}); }

template <typename T>
json int_array(const std::vector<T>& v, const char* dtype) {
  return json{{"dtype", dtype}, {"shape", {v.size()}}, {"data", v}};
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw SnapshotError(std::string("snapshot: missing field '") + key + "'");
  return obj.at(key);
}

std::vector<std::size_t> shape_of(const json& a) {
  return field(a, "shape").get<std::vector<std::size_t>>();
}

std::size_t volume(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

std::vector<double> read_f64(const json& arrays, const char* name, std::size_t expect) {
  const json& a = field(arrays, name);
  if (field(a, "dtype") != "f64le") throw SnapshotError(std::string("snapshot: array '") + name + "' is not f64le");
  const auto bytes = base64_decode(field(a, "data").get<std::string>());
  const std::size_t count = volume(shape_of(a));
  if (count != expect || bytes.size() != count * 8)
    throw SnapshotError(std::string("snapshot: array '") + name + "' has the wrong size");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)])) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

Matrix read_matrix(const json& arrays, const char* name, std::size_t rows, std::size_t cols) {
  const auto shape = shape_of(field(arrays, name));
  if (shape != std::vector<std::size_t>{rows, cols})
    throw SnapshotError(std::string("snapshot: matrix '") + name + "' has the wrong shape");
  Matrix m(rows, cols);
  m.data = read_f64(arrays, name, rows * cols);
  return m;
}

template <typename T>
std::vector<T> read_ints(const json& arrays, const char* name, std::size_t expect) {
  const json& a = field(arrays, name);
  auto v = field(a, "data").get<std::vector<T>>();
  if (v.size() != expect || volume(shape_of(a)) != expect)
    throw SnapshotError(std::string("snapshot: array '") + name + "' has the wrong size");
  return v;
}

}  // namespace

std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    const std::uint32_t v = (std::uint32_t{data[i]} << 16) | (std::uint32_t{data[i + 1]} << 8) | data[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i < len) {
    std::uint32_t v = std::uint32_t{data[i]} << 16;
    if (i + 1 < len) v |= std::uint32_t{data[i + 1]} << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < len ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw SnapshotError("base64: length is not a multiple of 4");
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + static_cast<std::size_t>(k)];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad) throw SnapshotError("base64: misplaced padding");
      v[k] = value(c);
      if (v[k] < 0) throw SnapshotError("base64: invalid character");
    }
    const std::uint32_t w = (static_cast<std::uint32_t>(v[0]) << 18) | (static_cast<std::uint32_t>(v[1]) << 12) |
                            (static_cast<std::uint32_t>(v[2]) << 6) | static_cast<std::uint32_t>(v[3]);
    out += static_cast<char>((w >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((w >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(w & 0xff);
  }
  return out;
}

json config_to_json(const TrainConfig& c) {
  json sched = json::array();
  for (const auto& ph : c.lr_schedule) sched.push_back({ph.start_epoch, ph.lr});
  return json{{"experiment", c.experiment},
              {"task", c.task},
              {"epochs", c.epochs},
              {"steps_per_epoch", c.steps_per_epoch},
              {"lr_schedule", sched},
              {"seed", c.seed},
              {"brn_nodes", c.brn_nodes},
              {"brn_degree", c.brn_degree},
              {"interface_dim", c.interface_dim},
              {"forget_rate", c.forget_rate},
              {"controller_dim", c.controller_dim},
              {"iv_wiring", wiring_name(c.iv_wiring)},
              {"output_bias", c.output_bias},
              {"brn_kind", kind_name(c.brn_kind)},
              {"rho", c.rho},
              {"eps", c.eps},
              {"validation_steps", c.validation_steps},
              {"validation_every", c.validation_every},
              {"exclude_warmup", c.exclude_warmup},
              {"batch_steps", c.batch_steps},
              {"resample_each_epoch", c.resample_each_epoch},
              {"test_steps", c.test_steps},
              {"test_switch_period", c.test_switch_period ? json(*c.test_switch_period) : json(nullptr)}};
}

TrainConfig config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "experiment") c.experiment = v.get<std::string>();
      else if (key == "task") c.task = v.get<std::string>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "steps_per_epoch") c.steps_per_epoch = v.get<std::size_t>();
      else if (key == "lr_schedule") {
        c.lr_schedule.clear();
        for (const auto& ph : v) c.lr_schedule.push_back({ph.at(0).get<std::size_t>(), ph.at(1).get<double>()});
      } else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "brn_nodes") c.brn_nodes = v.get<std::size_t>();
      else if (key == "brn_degree") c.brn_degree = v.get<std::size_t>();
      else if (key == "interface_dim") c.interface_dim = v.get<std::size_t>();
      else if (key == "forget_rate") c.forget_rate = v.get<double>();
      else if (key == "controller_dim") c.controller_dim = v.get<std::size_t>();
      else if (key == "iv_wiring") c.iv_wiring = parse_wiring(v.get<std::string>());
      else if (key == "output_bias") c.output_bias = v.get<bool>();
      else if (key == "brn_kind") c.brn_kind = parse_kind(v.get<std::string>());
      else if (key == "rho") c.rho = v.get<double>();
      else if (key == "eps") c.eps = v.get<double>();
      else if (key == "validation_steps") c.validation_steps = v.get<std::size_t>();
      else if (key == "validation_every") c.validation_every = v.get<std::size_t>();
      else if (key == "exclude_warmup") c.exclude_warmup = v.get<bool>();
      else if (key == "batch_steps") c.batch_steps = v.get<std::size_t>();
      else if (key == "resample_each_epoch") c.resample_each_epoch = v.get<bool>();
      else if (key == "test_steps") c.test_steps = v.get<std::size_t>();
      else if (key == "test_switch_period") {
        if (v.is_null()) c.test_switch_period.reset();
        else c.test_switch_period = v.get<std::size_t>();
      } else throw std::invalid_argument("unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }
  return c;
}

std::string snapshot(const WmModel& m, const TrainConfig& cfg) {
  const auto& p = m.ffn;
  std::vector<std::uint64_t> offsets(m.brn.offsets.begin(), m.brn.offsets.end());
  json arrays{
      {"ffn.w1", matrix_array(p.w1)},
      {"ffn.w2", matrix_array(p.w2)},
      {"ffn.w3", matrix_array(p.w3)},
      {"ffn.w4_out", matrix_array(p.w4_out)},
      {"ffn.w4_write", matrix_array(p.w4_write)},
      {"opt.acc1", matrix_array(m.opt.acc1)},
      {"opt.acc2", matrix_array(m.opt.acc2)},
      {"opt.acc3", matrix_array(m.opt.acc3)},
      {"opt.acc4", matrix_array(m.opt.acc4)},
      {"opt.acc_b", matrix_array(m.opt.acc_b)},
      {"ffn.b_out", matrix_array(p.b_out)},
      {"brn.offsets", int_array(offsets, "u64")},
      {"brn.sources", int_array(m.brn.sources, "u32")},
      {"brn.weights", f64_array(m.brn.weights, {m.brn.weights.size()})},
      {"brn.state", f64_array(m.state.activations, {m.state.activations.size()})},
      {"iface.indices", int_array(m.iface.indices, "u32")},
      {"pending_read", f64_array(m.pending_read, {m.pending_read.size()})},
  };
  json doc{{"format", "wmbind-snapshot"},
           {"version", kSnapshotVersion},
           {"config", config_to_json(cfg)},
           {"model",
            {{"input_dim", p.cfg.input_dim},
             {"output_dim", p.cfg.output_dim},
             {"iv_dim", p.cfg.iv_dim},
             {"controller_dim", p.cfg.controller_dim},
             {"iv_wiring", wiring_name(p.cfg.iv_wiring)},
             {"output_bias", p.cfg.output_bias},
             {"brn_kind", kind_name(m.brn.kind)},
             {"brn_nodes", m.brn.n},
             {"brn_degree", m.brn.d},
             {"forget_rate", f64_array(std::span<const double>(&m.brn.forget_rate, 1), {1})},
             {"rho", f64_array(std::span<const double>(&m.opt.rho, 1), {1})},
             {"eps", f64_array(std::span<const double>(&m.opt.eps, 1), {1})}}},
           {"arrays", arrays}};
  return doc.dump() + "\n";
}

Restored restore(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SnapshotError(std::string("snapshot: not valid JSON (") + e.what() + ")");
  }
  try {
    if (field(doc, "format") != "wmbind-snapshot") throw SnapshotError("snapshot: unexpected format tag");
    if (field(doc, "version") != kSnapshotVersion)
      throw SnapshotError("snapshot: version " + field(doc, "version").dump() + " is not supported (expected " +
                          std::to_string(kSnapshotVersion) + ")");
    TrainConfig cfg;
    try {
      cfg = config_from_json(field(doc, "config"), TrainConfig{});
    } catch (const std::invalid_argument& e) {
      throw SnapshotError(std::string("snapshot: bad config header: ") + e.what());
    }
    const json& hdr = field(doc, "model");
    const json& arrays = field(doc, "arrays");

    FfnConfig fc;
    fc.input_dim = field(hdr, "input_dim").get<std::size_t>();
    fc.output_dim = field(hdr, "output_dim").get<std::size_t>();
    fc.iv_dim = field(hdr, "iv_dim").get<std::size_t>();
    fc.controller_dim = field(hdr, "controller_dim").get<std::size_t>();
    fc.iv_wiring = parse_wiring(field(hdr, "iv_wiring").get<std::string>());
    fc.output_bias = field(hdr, "output_bias").get<bool>();
    fc.validate();
    const std::size_t c = fc.controller_dim;

    FfnParams p;
    p.cfg = fc;
    p.w1 = read_matrix(arrays, "ffn.w1", fc.in_width(), c);
    p.w2 = read_matrix(arrays, "ffn.w2", c, 2 * c);
    p.w3 = read_matrix(arrays, "ffn.w3", 2 * c, c);
    p.w4_out = read_matrix(arrays, "ffn.w4_out", c, fc.output_dim);
    p.w4_write = read_matrix(arrays, "ffn.w4_write", c, fc.iv_dim);
    const std::size_t nb = fc.output_bias ? fc.output_dim : 0;
    p.b_out = read_matrix(arrays, "ffn.b_out", nb ? 1 : 0, nb);

    RmspropState opt;
    opt.rho = read_f64(hdr, "rho", 1)[0];
    opt.eps = read_f64(hdr, "eps", 1)[0];
    opt.acc1 = read_matrix(arrays, "opt.acc1", p.w1.rows, p.w1.cols);
    opt.acc2 = read_matrix(arrays, "opt.acc2", p.w2.rows, p.w2.cols);
    opt.acc3 = read_matrix(arrays, "opt.acc3", p.w3.rows, p.w3.cols);
    opt.acc4 = read_matrix(arrays, "opt.acc4", p.w4_out.rows, p.w4_out.cols);
    opt.acc_b = read_matrix(arrays, "opt.acc_b", p.b_out.rows, p.b_out.cols);

    BrnNet net;
    net.kind = parse_kind(field(hdr, "brn_kind").get<std::string>());
    net.n = field(hdr, "brn_nodes").get<std::size_t>();
    net.d = field(hdr, "brn_degree").get<std::size_t>();
    net.forget_rate = read_f64(hdr, "forget_rate", 1)[0];
    const auto offsets = read_ints<std::uint64_t>(arrays, "brn.offsets", net.n + 1);
    net.offsets.assign(offsets.begin(), offsets.end());
    const std::size_t edges = net.offsets.back();
    if (net.offsets.front() != 0 || !std::is_sorted(net.offsets.begin(), net.offsets.end()))
      throw SnapshotError("snapshot: BRN offsets are not a valid prefix table");
    net.sources = read_ints<std::uint32_t>(arrays, "brn.sources", edges);
    for (auto s : net.sources)
      if (s >= net.n) throw SnapshotError("snapshot: BRN source index out of range");
    net.weights = read_f64(arrays, "brn.weights", edges);

    InterfaceMap iface{read_ints<std::uint32_t>(arrays, "iface.indices", fc.iv_dim)};
    auto state = read_f64(arrays, "brn.state", net.n);
    auto pending = read_f64(arrays, "pending_read", fc.iv_dim);

    WmModel m = assemble_model(std::move(p), std::move(opt), std::move(net), std::move(iface));
    m.state.activations = std::move(state);
    m.pending_read = std::move(pending);
    return Restored{std::move(m), std::move(cfg)};
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("snapshot: malformed document (") + e.what() + ")");
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: inconsistent model (") + e.what() + ")");
  }
}

}  // namespace wmbind
