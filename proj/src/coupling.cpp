#include "wmbind/coupling.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

#include "wmbind/format.hpp"

namespace wmbind {

std::uint64_t InterfaceMap::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint32_t v : indices) {
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

InterfaceMap select_interface(std::size_t n, std::size_t c, RngStream& rng) {
  if (c == 0 || c > n)
    throw std::invalid_argument("select_interface: need 0 < c <= n, got n=" + std::to_string(n) +
                                " c=" + std::to_string(c));
  std::vector<std::uint32_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < c; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(pool[i], pool[j]);
  }
  InterfaceMap map{std::vector<std::uint32_t>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(c))};
  std::sort(map.indices.begin(), map.indices.end());
  return map;
}

WmModel assemble_model(FfnParams ffn, RmspropState opt, BrnNet brn, InterfaceMap iface) {
  ffn.cfg.validate();
  if (iface.size() != ffn.cfg.iv_dim)
    throw std::invalid_argument("interface size " + std::to_string(iface.size()) +
                                " does not match controller iv_dim " + std::to_string(ffn.cfg.iv_dim));
  for (auto idx : iface.indices)
    if (idx >= brn.n) throw std::invalid_argument("interface index out of range of the BRN");
  WmModel m;
  m.ffn = std::move(ffn);
  m.opt = std::move(opt);
  m.brn = std::move(brn);
  m.iface = std::move(iface);
  reset(m);
  return m;
}

WmModel build_model(const ModelSpec& spec, const RngStream& root) {
  spec.ffn.validate();
  RngStream brn_rng = root.fork("brn");
  RngStream ffn_rng = root.fork("ffn");
  RngStream iface_rng = root.fork("iface");
  BrnNet brn = spec.brn_kind == BrnKind::random
                   ? build_random(spec.brn_nodes, spec.brn_degree, brn_rng, spec.forget_rate)
                   : build_lattice(spec.brn_nodes, spec.brn_degree, spec.forget_rate);
  FfnParams ffn = ffn_init(spec.ffn, ffn_rng);
  RmspropState opt = rmsprop_init(ffn, spec.rho, spec.eps);
  InterfaceMap iface = select_interface(spec.brn_nodes, spec.ffn.iv_dim, iface_rng);
  return assemble_model(std::move(ffn), std::move(opt), std::move(brn), std::move(iface));
}

void reset(WmModel& m) {
  m.state = BrnState::zeros(m.brn.n);
  m.pending_read.assign(m.iface.size(), 0.0);
  m.injection_.assign(m.brn.n, 0.0);
  m.next_.assign(m.brn.n, 0.0);
}

StepOutput wm_step(WmModel& m, std::span<const double> x) {
  StepOutput out;
  out.iv.read = m.pending_read;
  ffn_forward_into(m.ffn, x, out.iv.read, m.cache);
  out.y = m.cache.y;
  out.iv.write = m.cache.write;

  const auto& idx = m.iface.indices;
  for (std::size_t k = 0; k < idx.size(); ++k) m.injection_[idx[k]] = out.iv.write[k];
  brn_step_into(m.brn, m.state.activations, m.injection_, m.next_);
  std::swap(m.state.activations, m.next_);
  for (std::size_t k = 0; k < idx.size(); ++k) m.pending_read[k] = m.state.activations[idx[k]];
  return out;
}

StepOutput wm_step(WmModel& m, std::span<const std::uint8_t> x) {
  std::vector<double> xd(x.begin(), x.end());
  return wm_step(m, std::span<const double>(xd));
}

SequenceResult run_sequence(WmModel& m, std::span<const BitVector> inputs) {
  SequenceResult r;
  r.outputs.reserve(inputs.size());
  r.trace.reserve(inputs.size());
  for (const auto& x : inputs) {
    auto s = wm_step(m, std::span<const std::uint8_t>(x));
    r.outputs.push_back(std::move(s.y));
    r.trace.push_back(std::move(s.iv));
  }
  return r;
}

void write_iv_trace_csv(std::ostream& os, const IvTrace& trace) {
  os << "step,direction,index,value\n";
  for (std::size_t t = 0; t < trace.size(); ++t) {
    for (std::size_t k = 0; k < trace[t].read.size(); ++k)
      os << t << ",read," << k << ',' << format_real(trace[t].read[k]) << '\n';
    for (std::size_t k = 0; k < trace[t].write.size(); ++k)
      os << t << ",write," << k << ',' << format_real(trace[t].write[k]) << '\n';
  }
}

}  // namespace wmbind
