#include "onestage/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

#include "onestage/util.hpp"

namespace onestage {

namespace {

// Context pad id, matching ByteTokenizer and the synthetic corpus.
constexpr int kPadId = 0;

double gaussian(std::mt19937_64& gen) {
  double u1 = uniform_unit(gen);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  double u2 = uniform_unit(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

void ModelDims::validate() const {
  if (vocab < 2) throw std::invalid_argument("model vocab must be >= 2");
  if (window < 1) throw std::invalid_argument("model window must be >= 1");
  if (embed_dim < 1) throw std::invalid_argument("model embed_dim must be >= 1");
  if (hidden_dim < 1) throw std::invalid_argument("model hidden_dim must be >= 1");
}

std::size_t ModelDims::param_count() const {
  auto v = static_cast<std::size_t>(vocab);
  auto w = static_cast<std::size_t>(window);
  auto d = static_cast<std::size_t>(embed_dim);
  auto h = static_cast<std::size_t>(hidden_dim);
  return v * d + h * (w * d) + h + v * h + v;
}

ToyModel::ToyModel(const ModelDims& dims) : dims_(dims) {
  dims_.validate();
  params_.assign(dims_.param_count(), 0.0);
}

ToyModel ToyModel::random_init(const ModelDims& dims, std::uint64_t seed) {
  ToyModel model(dims);
  auto gen = seeded_engine(seed, 0x1417);
  // Weights N(0, 0.1); biases stay zero.
  for (std::size_t i = 0; i < model.b1_offset(); ++i) model.params_[i] = 0.1 * gaussian(gen);
  for (std::size_t i = model.w2_offset(); i < model.b2_offset(); ++i) {
    model.params_[i] = 0.1 * gaussian(gen);
  }
  return model;
}

std::size_t ToyModel::w1_offset() const {
  return static_cast<std::size_t>(dims_.vocab) * dims_.embed_dim;
}

std::size_t ToyModel::b1_offset() const {
  return w1_offset() +
         static_cast<std::size_t>(dims_.hidden_dim) * dims_.window * dims_.embed_dim;
}

std::size_t ToyModel::b2_offset() const {
  return w2_offset() + static_cast<std::size_t>(dims_.vocab) * dims_.hidden_dim;
}

std::size_t ToyModel::w2_offset() const {
  return b1_offset() + static_cast<std::size_t>(dims_.hidden_dim);
}

namespace {

// Scratch for one position's forward pass; reused across positions.
struct Activation {
  std::vector<double> x;     // W*d concatenated embeddings
  std::vector<double> a1;    // h, tanh applied
  std::vector<double> prob;  // V softmax
  double logp_target = 0.0;
};

void forward_position(const ToyModel& model, const std::vector<int>& context, int target,
                      Activation& act) {
  const auto& dims = model.dims();
  const auto& p = model.params();
  const std::size_t wd = static_cast<std::size_t>(dims.window) * dims.embed_dim;

  act.x.resize(wd);
  for (int w = 0; w < dims.window; ++w) {
    const double* row = &p[model.embedding_offset() +
                           static_cast<std::size_t>(context[w]) * dims.embed_dim];
    std::copy(row, row + dims.embed_dim, act.x.begin() + static_cast<std::size_t>(w) * dims.embed_dim);
  }

  act.a1.resize(static_cast<std::size_t>(dims.hidden_dim));
  const double* w1 = &p[model.w1_offset()];
  const double* b1 = &p[model.b1_offset()];
  for (int j = 0; j < dims.hidden_dim; ++j) {
    double z = b1[j];
    const double* row = w1 + static_cast<std::size_t>(j) * wd;
    for (std::size_t k = 0; k < wd; ++k) z += row[k] * act.x[k];
    act.a1[static_cast<std::size_t>(j)] = std::tanh(z);
  }

  act.prob.resize(static_cast<std::size_t>(dims.vocab));
  const double* w2 = &p[model.w2_offset()];
  const double* b2 = &p[model.b2_offset()];
  double max_logit = -HUGE_VAL;
  for (int v = 0; v < dims.vocab; ++v) {
    double z = b2[v];
    const double* row = w2 + static_cast<std::size_t>(v) * dims.hidden_dim;
    for (int j = 0; j < dims.hidden_dim; ++j) z += row[j] * act.a1[static_cast<std::size_t>(j)];
    act.prob[static_cast<std::size_t>(v)] = z;
    max_logit = std::max(max_logit, z);
  }
  double sum = 0.0;
  for (double& z : act.prob) {
    z = std::exp(z - max_logit);
    sum += z;
  }
  double log_sum = std::log(sum);
  for (double& z : act.prob) z /= sum;
  if (target >= 0) {
    // log p(target) recomputed from the shifted logit for stability.
    double z = b2[target];
    const double* row = w2 + static_cast<std::size_t>(target) * dims.hidden_dim;
    for (int j = 0; j < dims.hidden_dim; ++j) z += row[j] * act.a1[static_cast<std::size_t>(j)];
    act.logp_target = (z - max_logit) - log_sum;
  }
}

void check_token_ids(const TokenizedExample& example, int vocab) {
  if (example.token_ids.size() != example.loss_mask.size()) {
    throw std::invalid_argument("masked_loss: token/mask length mismatch in " + example.pair_id);
  }
  for (int id : example.token_ids) {
    if (id < 0 || id >= vocab) {
      throw std::invalid_argument("masked_loss: token id " + std::to_string(id) +
                                  " outside vocab in " + example.pair_id);
    }
  }
}

// Window before position t; out-of-range and false-mask slots read as pad,
// so masked-out content never reaches the model.
void build_context(const TokenizedExample& example, std::size_t t, int window,
                   std::vector<int>& context) {
  context.resize(static_cast<std::size_t>(window));
  for (int w = 0; w < window; ++w) {
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t) - window + w;
    if (pos < 0 || example.loss_mask[static_cast<std::size_t>(pos)] == 0) {
      context[static_cast<std::size_t>(w)] = kPadId;
    } else {
      context[static_cast<std::size_t>(w)] = example.token_ids[static_cast<std::size_t>(pos)];
    }
  }
}

double masked_loss_impl(const ToyModel& model, const std::vector<TokenizedExample>& batch,
                        std::vector<double>* grad) {
  const auto& dims = model.dims();
  std::uint64_t masked_positions = 0;
  for (const auto& example : batch) {
    check_token_ids(example, dims.vocab);
    for (auto m : example.loss_mask) masked_positions += m;
  }
  if (masked_positions == 0) {
    throw std::invalid_argument("masked_loss: batch has no true-mask positions");
  }

  if (grad != nullptr) grad->assign(model.params().size(), 0.0);
  const double scale = 1.0 / static_cast<double>(masked_positions);
  const std::size_t wd = static_cast<std::size_t>(dims.window) * dims.embed_dim;
  const auto& p = model.params();

  double loss = 0.0;
  std::vector<int> context;
  Activation act;
  std::vector<double> dlogits(static_cast<std::size_t>(dims.vocab));
  std::vector<double> dz1(static_cast<std::size_t>(dims.hidden_dim));
  std::vector<double> dx(wd);

  for (const auto& example : batch) {
    for (std::size_t t = 0; t < example.token_ids.size(); ++t) {
      if (example.loss_mask[t] == 0) continue;
      int target = example.token_ids[t];
      build_context(example, t, dims.window, context);
      forward_position(model, context, target, act);
      loss -= act.logp_target * scale;
      if (grad == nullptr) continue;

      for (int v = 0; v < dims.vocab; ++v) {
        dlogits[static_cast<std::size_t>(v)] =
            (act.prob[static_cast<std::size_t>(v)] - (v == target ? 1.0 : 0.0)) * scale;
      }
      double* g_w2 = grad->data() + model.w2_offset();
      double* g_b2 = grad->data() + model.b2_offset();
      const double* w2 = &p[model.w2_offset()];
      std::fill(dz1.begin(), dz1.end(), 0.0);
      for (int v = 0; v < dims.vocab; ++v) {
        double dv = dlogits[static_cast<std::size_t>(v)];
        g_b2[v] += dv;
        double* g_row = g_w2 + static_cast<std::size_t>(v) * dims.hidden_dim;
        const double* w_row = w2 + static_cast<std::size_t>(v) * dims.hidden_dim;
        for (int j = 0; j < dims.hidden_dim; ++j) {
          g_row[j] += dv * act.a1[static_cast<std::size_t>(j)];
          dz1[static_cast<std::size_t>(j)] += dv * w_row[j];
        }
      }
      for (int j = 0; j < dims.hidden_dim; ++j) {
        double a = act.a1[static_cast<std::size_t>(j)];
        dz1[static_cast<std::size_t>(j)] *= 1.0 - a * a;  // tanh'
      }
      double* g_w1 = grad->data() + model.w1_offset();
      double* g_b1 = grad->data() + model.b1_offset();
      const double* w1 = &p[model.w1_offset()];
      std::fill(dx.begin(), dx.end(), 0.0);
      for (int j = 0; j < dims.hidden_dim; ++j) {
        double dj = dz1[static_cast<std::size_t>(j)];
        if (dj == 0.0) continue;
        g_b1[j] += dj;
        double* g_row = g_w1 + static_cast<std::size_t>(j) * wd;
        const double* w_row = w1 + static_cast<std::size_t>(j) * wd;
        for (std::size_t k = 0; k < wd; ++k) {
          g_row[k] += dj * act.x[k];
          dx[k] += dj * w_row[k];
        }
      }
      double* g_embed = grad->data() + model.embedding_offset();
      for (int w = 0; w < dims.window; ++w) {
        double* g_row = g_embed + static_cast<std::size_t>(context[static_cast<std::size_t>(w)]) *
                                      dims.embed_dim;
        const double* dxw = dx.data() + static_cast<std::size_t>(w) * dims.embed_dim;
        for (int e = 0; e < dims.embed_dim; ++e) g_row[e] += dxw[e];
      }
    }
  }
  return loss;
}

}  // namespace

std::vector<double> ToyModel::forward(const std::vector<int>& context) const {
  if (context.size() != static_cast<std::size_t>(dims_.window)) {
    throw std::invalid_argument("forward: expected exactly window-many context ids");
  }
  for (int id : context) {
    if (id < 0 || id >= dims_.vocab) {
      throw std::invalid_argument("forward: context id outside vocab");
    }
  }
  Activation act;
  forward_position(*this, context, -1, act);
  return act.prob;
}

double masked_loss(const ToyModel& model, const std::vector<TokenizedExample>& batch) {
  return masked_loss_impl(model, batch, nullptr);
}

double masked_loss_and_grad(const ToyModel& model, const std::vector<TokenizedExample>& batch,
                            std::vector<double>& grad) {
  return masked_loss_impl(model, batch, &grad);
}

std::string LossTrace::to_csv() const {
  std::string out = "step,loss\n";
  for (const auto& point : points) {
    out += std::to_string(point.step);
    out += ',';
    out += format_double(point.loss);
    out += '\n';
  }
  return out;
}

std::optional<LossTrace> LossTrace::from_csv(std::string_view text) {
  LossTrace trace;
  std::size_t start = 0;
  bool first = true;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    if (first && line == "step,loss") {
      first = false;
      continue;
    }
    first = false;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) return std::nullopt;
    try {
      TracePoint point;
      point.step = std::stoi(line.substr(0, comma));
      point.loss = std::stod(line.substr(comma + 1));
      trace.points.push_back(point);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return trace;
}

const char* to_string(TrainMode mode) {
  return mode == TrainMode::one_stage ? "one_stage" : "two_stage";
}

std::optional<TrainMode> parse_train_mode(std::string_view s) {
  if (s == "one_stage") return TrainMode::one_stage;
  if (s == "two_stage") return TrainMode::two_stage;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train.learning_rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
  if (total_steps < 1) throw std::invalid_argument("train.total_steps must be >= 1");
  if (mode == TrainMode::one_stage) {
    if (stage_boundary || warmup_steps) {
      throw std::invalid_argument("train: one_stage takes neither stage_boundary nor warmup_steps");
    }
    return;
  }
  if (!stage_boundary || !warmup_steps) {
    throw std::invalid_argument("train: two_stage requires stage_boundary and warmup_steps");
  }
  if (*stage_boundary < 1 || *stage_boundary >= total_steps) {
    throw std::invalid_argument("train.stage_boundary must lie strictly inside total_steps");
  }
  if (*warmup_steps < 1) throw std::invalid_argument("train.warmup_steps must be >= 1");
}

TrainResult train(const ModelDims& dims, const TrainData& data, const TrainConfig& config) {
  config.validate();
  const std::vector<TokenizedExample>* phase1 = nullptr;
  const std::vector<TokenizedExample>* phase2 = nullptr;
  if (config.mode == TrainMode::one_stage) {
    if (data.mixed.empty()) throw std::invalid_argument("train: one_stage dataset is empty");
    phase1 = &data.mixed;
    phase2 = &data.mixed;
  } else {
    if (data.pretrain.empty() || data.sft.empty()) {
      throw std::invalid_argument("train: two_stage requires both stage datasets");
    }
    phase1 = &data.pretrain;
    phase2 = &data.sft;
  }
  const int boundary = config.mode == TrainMode::two_stage ? *config.stage_boundary
                                                           : config.total_steps;

  TrainResult result{ToyModel::random_init(dims, config.seed), {}};
  auto sampler = seeded_engine(config.seed, 0xba7c);
  std::vector<TokenizedExample> batch;
  std::vector<double> grad;
  result.trace.points.reserve(static_cast<std::size_t>(config.total_steps));

  for (int step = 0; step < config.total_steps; ++step) {
    const auto& pool = step < boundary ? *phase1 : *phase2;
    batch.clear();
    for (int b = 0; b < config.batch_size; ++b) {
      batch.push_back(pool[static_cast<std::size_t>(sampler() % pool.size())]);
    }
    double loss = masked_loss_and_grad(result.model, batch, grad);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
    }
    double lr = config.learning_rate;
    if (config.mode == TrainMode::two_stage && step >= boundary) {
      int since = step - boundary + 1;
      if (since < *config.warmup_steps) {
        lr *= static_cast<double>(since) / static_cast<double>(*config.warmup_steps);
      }
    }
    auto& params = result.model.params();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    result.trace.points.push_back({step, loss});
  }
  return result;
}

double boundary_jump(const LossTrace& trace, int boundary_step, int window) {
  if (window < 1) throw std::invalid_argument("boundary_jump: window must be >= 1");
  auto loss_at = [&](int step) {
    auto it = std::lower_bound(trace.points.begin(), trace.points.end(), step,
                               [](const TracePoint& p, int s) { return p.step < s; });
    if (it == trace.points.end() || it->step != step) {
      throw std::out_of_range("boundary_jump: window leaves the trace at step " +
                              std::to_string(step));
    }
    return it->loss;
  };
  double before = 0.0, after = 0.0;
  for (int s = boundary_step - window; s < boundary_step; ++s) before += loss_at(s);
  for (int s = boundary_step; s < boundary_step + window; ++s) after += loss_at(s);
  return (after - before) / static_cast<double>(window);
}

double finite_diff_check(const ToyModel& model, const TokenizedExample& example, double epsilon,
                         std::size_t max_samples) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("finite_diff_check: epsilon must be positive");
  if (max_samples == 0) throw std::invalid_argument("finite_diff_check: max_samples must be >= 1");
  std::vector<TokenizedExample> batch{example};
  std::vector<double> grad;
  masked_loss_and_grad(model, batch, grad);

  ToyModel probe = model;
  auto& params = probe.params();
  const std::size_t stride = std::max<std::size_t>(1, params.size() / max_samples);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); i += stride) {
    const double keep = params[i];
    params[i] = keep + epsilon;
    double plus = masked_loss(probe, batch);
    params[i] = keep - epsilon;
    double minus = masked_loss(probe, batch);
    params[i] = keep;
    double numeric = (plus - minus) / (2.0 * epsilon);
    double denom = std::max(std::abs(numeric), std::abs(grad[i]));
    if (denom < 1e-8) continue;  // both effectively zero (masked-out path)
    worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
  }
  return worst;
}

namespace {

// First-order Markov walk over a contiguous id range: with probability
// `stick`, advance by `hop` (mod size); otherwise jump uniformly.
int chain_step(int index, int size, int hop, double stick, std::mt19937_64& gen) {
  if (uniform_unit(gen) < stick) return (index + hop) % size;
  return static_cast<int>(gen() % static_cast<std::uint64_t>(size));
}

constexpr int kSubVocabA = 3;   // ids 3..16
constexpr int kSubVocabB = 17;  // ids 17..30
constexpr int kSubVocabSize = 14;
constexpr int kSepId = 1;
constexpr int kEosId = 2;

}  // namespace

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t docs,
                                          std::size_t pairs) {
  SyntheticCorpus corpus;
  auto gen = seeded_engine(seed, 0x5e17);

  for (std::size_t n = 0; n < docs; ++n) {
    TokenizedExample doc;
    doc.pair_id = "doc-" + std::to_string(n);
    std::size_t len = 24 + gen() % 17;
    int idx = static_cast<int>(gen() % kSubVocabSize);
    for (std::size_t t = 0; t < len; ++t) {
      doc.token_ids.push_back(kSubVocabA + idx);
      doc.loss_mask.push_back(1);
      idx = chain_step(idx, kSubVocabSize, 1, 0.85, gen);
    }
    corpus.pretrain_docs.push_back(std::move(doc));
  }

  for (std::size_t n = 0; n < pairs; ++n) {
    TokenizedExample pair;
    pair.pair_id = "sft-" + std::to_string(n);
    std::size_t instr_len = 6 + gen() % 5;
    for (std::size_t t = 0; t < instr_len; ++t) {
      pair.token_ids.push_back(kSubVocabB + static_cast<int>(gen() % kSubVocabSize));
      pair.loss_mask.push_back(0);
    }
    pair.token_ids.push_back(kSepId);
    pair.loss_mask.push_back(0);
    std::size_t out_len = 12 + gen() % 9;
    int idx = static_cast<int>(gen() % kSubVocabSize);
    for (std::size_t t = 0; t < out_len; ++t) {
      pair.token_ids.push_back(kSubVocabB + idx);
      pair.loss_mask.push_back(1);
      idx = chain_step(idx, kSubVocabSize, 3, 0.9, gen);
    }
    pair.token_ids.push_back(kEosId);
    pair.loss_mask.push_back(1);
    corpus.sft_pairs.push_back(std::move(pair));
  }

  // One-stage arm: the same documents restated as masked pairs (short
  // leading context as the instruction) plus the same sft pairs.
  for (std::size_t n = 0; n < corpus.pretrain_docs.size(); ++n) {
    const auto& doc = corpus.pretrain_docs[n];
    TokenizedExample mixed;
    mixed.pair_id = "mixed-" + std::to_string(n);
    std::size_t instr_len = std::min<std::size_t>(6, doc.token_ids.size() / 3);
    for (std::size_t t = 0; t < doc.token_ids.size(); ++t) {
      mixed.token_ids.push_back(doc.token_ids[t]);
      mixed.loss_mask.push_back(t < instr_len ? 0 : 1);
      if (t + 1 == instr_len) {
        mixed.token_ids.push_back(kSepId);
        mixed.loss_mask.push_back(0);
      }
    }
    mixed.token_ids.push_back(kEosId);
    mixed.loss_mask.push_back(1);
    corpus.mixed.push_back(std::move(mixed));
  }
  corpus.mixed.insert(corpus.mixed.end(), corpus.sft_pairs.begin(), corpus.sft_pairs.end());
  seeded_shuffle(corpus.mixed, gen);
  return corpus;
}

BoundaryExperiment run_boundary_experiment(std::uint64_t seed, int total_steps, int boundary,
                                           int window) {
  SyntheticCorpus corpus = generate_synthetic_corpus(seed);
  ModelDims dims;
  dims.vocab = SyntheticCorpus::kVocab;
  dims.window = 8;
  dims.embed_dim = 16;
  dims.hidden_dim = 32;

  TrainData data;
  data.mixed = corpus.mixed;
  data.pretrain = corpus.pretrain_docs;
  data.sft = corpus.sft_pairs;

  TrainConfig one;
  one.mode = TrainMode::one_stage;
  one.total_steps = total_steps;
  one.seed = seed;

  TrainConfig two = one;
  two.mode = TrainMode::two_stage;
  two.stage_boundary = boundary;
  two.warmup_steps = 20;

  BoundaryExperiment experiment;
  auto result_one = train(dims, data, one);
  auto result_two = train(dims, data, two);
  experiment.jump_one_stage = boundary_jump(result_one.trace, boundary, window);
  experiment.jump_two_stage = boundary_jump(result_two.trace, boundary, window);
  experiment.trace_one_stage = std::move(result_one.trace);
  experiment.trace_two_stage = std::move(result_two.trace);
  return experiment;
}

void save_checkpoint(const ToyModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json header;
  header["vocab"] = model.dims().vocab;
  header["window"] = model.dims().window;
  header["embed_dim"] = model.dims().embed_dim;
  header["hidden_dim"] = model.dims().hidden_dim;
  header["param_count"] = model.params().size();
  header["layout"] = {"embedding", "w1", "b1", "w2", "b2"};
  header["dtype"] = "float64-le";
  std::string blob = header.dump();
  blob += '\n';
  std::size_t bytes = model.params().size() * sizeof(double);
  std::size_t text_size = blob.size();
  blob.resize(text_size + bytes);
  std::memcpy(blob.data() + text_size, model.params().data(), bytes);
  atomic_write_file(path, blob);
}

ToyModel load_checkpoint(const std::filesystem::path& path) {
  std::string blob = read_file(path);
  std::size_t newline = blob.find('\n');
  if (newline == std::string::npos) throw std::runtime_error("checkpoint: missing header line");
  auto header = nlohmann::json::parse(blob.substr(0, newline), nullptr, false);
  if (header.is_discarded()) throw std::runtime_error("checkpoint: bad header");
  ModelDims dims;
  try {
    dims.vocab = header.at("vocab").get<int>();
    dims.window = header.at("window").get<int>();
    dims.embed_dim = header.at("embed_dim").get<int>();
    dims.hidden_dim = header.at("hidden_dim").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad header: ") + e.what());
  }
  ToyModel model(dims);
  std::size_t bytes = model.params().size() * sizeof(double);
  if (blob.size() - newline - 1 != bytes) {
    throw std::runtime_error("checkpoint: parameter payload size mismatch");
  }
  std::memcpy(model.params().data(), blob.data() + newline + 1, bytes);
  return model;
}

std::vector<int> greedy_generate(const ToyModel& model, const std::vector<int>& prompt,
                                 std::size_t max_new_tokens, int eos_id) {
  std::vector<int> sequence = prompt;
  const int window = model.dims().window;
  std::vector<int> context(static_cast<std::size_t>(window), kPadId);
  for (std::size_t n = 0; n < max_new_tokens; ++n) {
    for (int w = 0; w < window; ++w) {
      std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(sequence.size()) - window + w;
      context[static_cast<std::size_t>(w)] =
          pos < 0 ? kPadId : sequence[static_cast<std::size_t>(pos)];
    }
    auto prob = model.forward(context);
    int best = 0;
    for (int v = 1; v < model.dims().vocab; ++v) {
      if (prob[static_cast<std::size_t>(v)] > prob[static_cast<std::size_t>(best)]) best = v;
    }
    sequence.push_back(best);
    if (best == eos_id) break;
  }
  return sequence;
}

}  // namespace onestage
