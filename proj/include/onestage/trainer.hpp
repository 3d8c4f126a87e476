#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "onestage/unify.hpp"

namespace onestage {

struct ModelDims {
  int vocab = 259;
  int window = 16;
  int embed_dim = 32;
  int hidden_dim = 64;

  void validate() const;
  std::size_t param_count() const;
};

// Fixed-window next-token predictor: embedding lookup, concatenated
// context window, one tanh hidden layer, softmax output. All parameters
// live in one flat double array so SGD, finite differences, and
// checkpointing can treat the model uniformly.
//
// Parameter layout (row-major):
//   embedding  V x d
//   w1         h x (W*d)
//   b1         h
//   w2         V x h
//   b2         V
class ToyModel {
 public:
  explicit ToyModel(const ModelDims& dims);
  static ToyModel random_init(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::size_t embedding_offset() const { return 0; }
  std::size_t w1_offset() const;
  std::size_t b1_offset() const;
  std::size_t w2_offset() const;
  std::size_t b2_offset() const;

  // Probability distribution over the next token given exactly W context
  // ids (sums to 1 within 1e-6). Throws std::invalid_argument on a wrong
  // context length or an id outside [0, V).
  std::vector<double> forward(const std::vector<int>& context) const;

 private:
  ModelDims dims_;
  std::vector<double> params_;
};

// The loss mask governs both ends of training: a false position is never
// a prediction target, and it enters every context window as the pad id.
// Masked-out content therefore cannot influence the loss at all — the
// loss is exactly invariant to rewrites of false-mask tokens.
//
// Mean of -log p(token[t] | window before t) over true-mask positions of
// the whole batch. Throws std::invalid_argument when no position in the
// batch is true-masked or an id is outside [0, V).
double masked_loss(const ToyModel& model, const std::vector<TokenizedExample>& batch);

// Same traversal, also accumulating d loss / d params into `grad`
// (resized and zeroed here).
double masked_loss_and_grad(const ToyModel& model, const std::vector<TokenizedExample>& batch,
                            std::vector<double>& grad);

struct TracePoint {
  int step = 0;
  double loss = 0.0;
};

struct LossTrace {
  std::vector<TracePoint> points;

  std::string to_csv() const;  // "step,loss" header, round-trip doubles
  static std::optional<LossTrace> from_csv(std::string_view text);
};

enum class TrainMode { one_stage, two_stage };

const char* to_string(TrainMode mode);
std::optional<TrainMode> parse_train_mode(std::string_view s);

struct TrainConfig {
  TrainMode mode = TrainMode::one_stage;
  double learning_rate = 0.05;
  int batch_size = 8;
  int total_steps = 400;
  std::uint64_t seed = 0;
  // two_stage only: switch datasets at this step, then ramp the learning
  // rate linearly over warmup_steps.
  std::optional<int> stage_boundary;
  std::optional<int> warmup_steps;

  void validate() const;
};

// The schedule alone forces the control arm to carry extra knobs.
inline constexpr int kOneStageConfigFields = 5;  // mode, lr, batch, steps, seed
inline constexpr int kTwoStageConfigFields = kOneStageConfigFields + 2;  // + boundary, warmup
static_assert(kTwoStageConfigFields > kOneStageConfigFields,
              "the two-stage protocol must need strictly more hyperparameters");

struct TrainData {
  std::vector<TokenizedExample> mixed;     // one_stage input
  std::vector<TokenizedExample> pretrain;  // two_stage, before the boundary
  std::vector<TokenizedExample> sft;       // two_stage, after the boundary
};

struct TrainResult {
  ToyModel model;
  LossTrace trace;
};

// Plain SGD, one recorded loss per step (pre-update batch loss),
// bit-identical traces for equal (data, config, dims). Throws
// std::runtime_error with the step number if the loss turns non-finite.
TrainResult train(const ModelDims& dims, const TrainData& data, const TrainConfig& config);

// mean(loss over [boundary, boundary+window)) minus
// mean(loss over [boundary-window, boundary)); throws std::out_of_range
// when either window leaves the trace.
double boundary_jump(const LossTrace& trace, int boundary_step, int window);

// Max relative error between analytic gradients and central finite
// differences over an evenly strided sample of parameters. Near-zero
// pairs (both below 1e-8) count as zero error.
double finite_diff_check(const ToyModel& model, const TokenizedExample& example,
                         double epsilon = 1e-4, std::size_t max_samples = 200);

// ------------------------------------------------------ synthetic corpus

// Two disjoint sub-vocabularies with different Markov statistics: docs
// walk chain A (all-true mask, the "raw pretrain" class), pairs walk
// chain B (instruction masked out, the "sft" class). `mixed` restates the
// docs as pairs and interleaves them with the same sft pairs, so one- and
// two-stage runs see the same data budget while the two-stage control
// meets a distribution shift at its boundary.
struct SyntheticCorpus {
  static constexpr int kVocab = 32;
  std::vector<TokenizedExample> pretrain_docs;
  std::vector<TokenizedExample> sft_pairs;
  std::vector<TokenizedExample> mixed;
};

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t docs = 300,
                                          std::size_t pairs = 300);

struct BoundaryExperiment {
  double jump_one_stage = 0.0;
  double jump_two_stage = 0.0;
  LossTrace trace_one_stage;
  LossTrace trace_two_stage;
};

// Paired one-stage/two-stage runs on the synthetic corpus: identical
// seed, dims, learning rate, and step budget; the jump is measured at the
// two-stage boundary step in both traces.
BoundaryExperiment run_boundary_experiment(std::uint64_t seed, int total_steps = 400,
                                           int boundary = 200, int window = 20);

// -------------------------------------------------------- checkpoint io

// One JSON header line with the shape, then the raw little-endian
// doubles of the flat parameter array.
void save_checkpoint(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_checkpoint(const std::filesystem::path& path);

// Greedy argmax continuation for smoke tests; stops at eos_id or
// max_new_tokens.
std::vector<int> greedy_generate(const ToyModel& model, const std::vector<int>& prompt,
                                 std::size_t max_new_tokens, int eos_id);

}  // namespace onestage
