#pragma once

// Binds the controller and the BRN into one stateful working-memory model.
//
// Each step (read before write):
//   1. read    <- pending_read (interface activations left by the last step)
//   2. y, wr   <- controller(x, read)
//   3. inject wr at the interface nodes, 0 elsewhere, and advance the BRN once
//   4. pending_read <- new BRN activations at the interface nodes

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "wmbind/brn.hpp"
#include "wmbind/controller.hpp"
#include "wmbind/numerics.hpp"

namespace wmbind {

/// c distinct BRN node indices, ascending. Position k of the read/write
/// vectors maps to node indices[k].
struct InterfaceMap {
  std::vector<std::uint32_t> indices;

  std::size_t size() const { return indices.size(); }
  std::uint64_t fingerprint() const;
  friend bool operator==(const InterfaceMap&, const InterfaceMap&) = default;
};

InterfaceMap select_interface(std::size_t n, std::size_t c, RngStream& rng);

struct ModelSpec {
  FfnConfig ffn;
  std::size_t brn_nodes = 1000;
  std::size_t brn_degree = 20;
  double forget_rate = kDefaultForgetRate;
  BrnKind brn_kind = BrnKind::random;
  double rho = 0.9;
  double eps = 1e-8;
};

struct WmModel {
  FfnParams ffn;
  RmspropState opt;
  BrnNet brn;
  BrnState state;
  InterfaceMap iface;
  std::vector<double> pending_read;
  /// Forward pass of the most recent step, for training.
  ForwardCache cache;

  std::vector<double> injection_;
  std::vector<double> next_;
};

/// Builds a fresh model. Substreams "brn", "ffn" and "iface" of `root` drive
/// BRN wiring, controller init and interface selection.
WmModel build_model(const ModelSpec& spec, const RngStream& root);

/// Assembles a model from parts and checks their dimensions agree. State is reset.
WmModel assemble_model(FfnParams ffn, RmspropState opt, BrnNet brn, InterfaceMap iface);

struct IvSample {
  std::vector<double> write;
  std::vector<double> read;
};
using IvTrace = std::vector<IvSample>;

struct StepOutput {
  std::vector<double> y;
  IvSample iv;
};

StepOutput wm_step(WmModel& model, std::span<const double> x);
StepOutput wm_step(WmModel& model, std::span<const std::uint8_t> x);

/// Zeroes BRN activations and the pending read; weights and optimizer untouched.
void reset(WmModel& model);

struct SequenceResult {
  std::vector<std::vector<double>> outputs;
  IvTrace trace;
};

SequenceResult run_sequence(WmModel& model, std::span<const BitVector> inputs);

/// CSV with columns step,direction,index,value; index is the IV position.
void write_iv_trace_csv(std::ostream& os, const IvTrace& trace);

}  // namespace wmbind
