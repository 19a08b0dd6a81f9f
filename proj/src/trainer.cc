/* Copyright 2026 The attncomp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "attncomp/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "attncomp/error.h"
#include "attncomp/rng.h"

namespace attncomp {
namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;  // "init"

double clamp_score(double s) {
  return std::clamp(s, kScoreClamp, 1.0 - kScoreClamp);
}

double bce(double s, int r) {
  const double c = clamp_score(s);
  return -(r * std::log(c) + (1 - r) * std::log(1.0 - c));
}

// d bce / d s; zero inside the clamped region.
double bce_derivative(double s, int r) {
  if (s < kScoreClamp || s > 1.0 - kScoreClamp) return 0.0;
  return -(r / s - (1 - r) / (1.0 - s));
}

void check_labels(const SegmentScores& scores, std::span<const int> labels) {
  if (labels.size() != scores.documents.size()) {
    throw InvalidArgument("labels (" + std::to_string(labels.size()) +
                          ") do not align with documents (" +
                          std::to_string(scores.documents.size()) + ")");
  }
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

int instruction_label(std::span<const int> labels) {
  return std::all_of(labels.begin(), labels.end(),
                     [](int r) { return r == 0; })
             ? 1
             : 0;
}

LossBreakdown loss(const SegmentScores& scores, std::span<const int> labels,
                   double lambda) {
  check_labels(scores, labels);
  LossBreakdown out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.l_doc += bce(scores.documents[i].score, labels[i]);
  }
  out.l_ins = bce(scores.instruction, instruction_label(labels));
  out.total = out.l_doc + lambda * out.l_ins;
  return out;
}

TrainingInstance::TrainingInstance(HiddenBundle b, std::vector<int> l)
    : bundle(std::move(b)), labels(std::move(l)) {
  bundle.validate();
  if (labels.size() != bundle.layout.document_ids().size()) {
    throw InvalidArgument("training instance has " +
                          std::to_string(labels.size()) + " labels for " +
                          std::to_string(bundle.layout.document_ids().size()) +
                          " documents");
  }
  for (int r : labels) {
    if (r != 0 && r != 1) throw InvalidArgument("labels must be 0 or 1");
  }
}

TrainingInstance permute_documents(const TrainingInstance& instance,
                                   std::span<const std::size_t> order) {
  const auto& layout = instance.bundle.layout;
  const std::size_t docs = layout.document_ids().size();
  if (order.size() != docs) throw InvalidArgument("permutation size mismatch");
  std::vector<std::vector<std::size_t>> doc_spans(docs);
  for (std::size_t s = 1; s < layout.spans().size(); ++s) {
    doc_spans[static_cast<std::size_t>(layout.span_document()[s])].push_back(s);
  }
  const auto& src = instance.bundle.context;
  Matrix context(src.rows(), src.cols());
  std::vector<SegmentSpan> spans{layout.instruction()};
  std::vector<int> labels;
  const auto ins_rows = static_cast<Eigen::Index>(layout.instruction().size());
  context.topRows(ins_rows) = src.topRows(ins_rows);
  std::size_t cursor = layout.instruction().end;
  std::vector<bool> seen(docs, false);
  for (std::size_t old : order) {
    if (old >= docs || seen[old]) throw InvalidArgument("not a permutation");
    seen[old] = true;
    labels.push_back(instance.labels[old]);
    for (std::size_t s : doc_spans[old]) {
      SegmentSpan span = layout.spans()[s];
      const auto rows = static_cast<Eigen::Index>(span.size());
      context.middleRows(static_cast<Eigen::Index>(cursor), rows) =
          src.middleRows(static_cast<Eigen::Index>(span.start), rows);
      span.start = cursor;
      span.end = cursor + static_cast<std::size_t>(rows);
      cursor = span.end;
      spans.push_back(std::move(span));
    }
  }
  HiddenBundle bundle{std::move(context), instance.bundle.query,
                      PromptLayout::from_spans(std::move(spans),
                                               layout.query_tokens(),
                                               layout.granularity())};
  return TrainingInstance(std::move(bundle), std::move(labels));
}

Gradients compute_gradients(const HiddenBundle& bundle,
                            const CrossAttentionHead& head,
                            std::span<const int> labels, double lambda) {
  auto fwd = forward(bundle, head, /*keep_trace=*/true);
  Gradients g;
  g.scores = segment_scores(fwd.attention, bundle.layout);
  g.loss = loss(g.scores, labels, lambda);

  // dL/ds per segment: index 0 is the instruction, 1 + d is document d.
  std::vector<double> d_segment(labels.size() + 1);
  d_segment[0] =
      lambda * bce_derivative(g.scores.instruction, instruction_label(labels));
  for (std::size_t d = 0; d < labels.size(); ++d) {
    d_segment[d + 1] = bce_derivative(g.scores.documents[d].score, labels[d]);
  }

  // dL/dA_ij depends only on the column; identical for every query row. The
  // 1/H of the head average is folded in.
  const auto columns = bundle.layout.column_documents();
  const double m = static_cast<double>(bundle.layout.query_tokens());
  Eigen::RowVectorXd d_probs(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    d_probs(static_cast<Eigen::Index>(j)) =
        d_segment[static_cast<std::size_t>(columns[j])] / (m * head.heads);
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(head.d_a));
  const auto& trace = *fwd.trace;
  for (int h = 0; h < head.heads; ++h) {
    const Matrix& p = trace.probabilities[h];
    // Softmax backward with a row-constant upstream gradient v:
    // dS = P o (v - (P v)).
    const Eigen::VectorXd pv = p * d_probs.transpose();
    Matrix centered = (-pv).replicate(1, p.cols());
    centered.rowwise() += d_probs;
    const Matrix d_logits = scale * p.cwiseProduct(centered);
    const Matrix q = bundle.query * head.w_query[h];
    const Matrix k = bundle.context * head.w_key[h];
    g.d_query.push_back(bundle.query.transpose() * (d_logits * k));
    g.d_key.push_back(bundle.context.transpose() * (d_logits.transpose() * q));
    if (!g.d_query.back().allFinite() || !g.d_key.back().allFinite()) {
      throw Numerical("non-finite gradient in head " + std::to_string(h));
    }
  }
  return g;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be non-negative");
  }
  if (batch_size <= 0 || epochs <= 0) {
    throw InvalidArgument("batch_size and epochs must be positive");
  }
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw InvalidArgument("invalid Adam hyperparameters");
  }
  if (threads <= 0 || heads <= 0 || head_dim < 0) {
    throw InvalidArgument("threads and heads must be positive");
  }
}

TrainConfig parse_train_config(std::istream& in) {
  TrainConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) +
                            ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "learning_rate") c.learning_rate = std::stod(value);
      else if (key == "batch_size") c.batch_size = std::stoi(value);
      else if (key == "epochs") c.epochs = std::stoi(value);
      else if (key == "lambda") c.lambda = std::stod(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "adam_beta1") c.adam_beta1 = std::stod(value);
      else if (key == "adam_beta2") c.adam_beta2 = std::stod(value);
      else if (key == "adam_eps") c.adam_eps = std::stod(value);
      else if (key == "threads") c.threads = std::stoi(value);
      else if (key == "heads") c.heads = std::stoi(value);
      else if (key == "head_dim") c.head_dim = std::stoi(value);
      else if (key == "shuffle_docs_each_epoch") {
        if (value == "true" || value == "1" || value == "on") {
          c.shuffle_docs_each_epoch = true;
        } else if (value == "false" || value == "0" || value == "off") {
          c.shuffle_docs_each_epoch = false;
        } else {
          throw std::invalid_argument(value);
        }
      } else {
        throw InvalidArgument("config line " + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw InvalidArgument("config line " + std::to_string(line_no) +
                            ": bad value '" + value + "' for " + key);
    }
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  return parse_train_config(in);
}

AdamOptimizer::AdamOptimizer(const CrossAttentionHead& shape, double beta1,
                             double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (int h = 0; h < shape.heads; ++h) {
    const Matrix zero = Matrix::Zero(shape.d_model, shape.d_a);
    m_query_.push_back(zero);
    v_query_.push_back(zero);
    m_key_.push_back(zero);
    v_key_.push_back(zero);
  }
}

void AdamOptimizer::step(CrossAttentionHead& head,
                         const std::vector<Matrix>& d_query,
                         const std::vector<Matrix>& d_key,
                         double learning_rate) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](Matrix& w, Matrix& m, Matrix& v, const Matrix& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseAbs2();
    w.array() -= learning_rate * (m.array() / c1) /
                 ((v.array() / c2).sqrt() + eps_);
  };
  for (int h = 0; h < head.heads; ++h) {
    update(head.w_query[h], m_query_[h], v_query_[h], d_query[h]);
    update(head.w_key[h], m_key_[h], v_key_[h], d_key[h]);
  }
}

CrossAttentionHead initial_head(const TrainConfig& config, int d_model) {
  config.validate();
  if (d_model <= 0) throw InvalidArgument("d_model must be positive");
  const int d_a =
      config.head_dim > 0 ? config.head_dim : std::max(1, d_model / config.heads);
  return init_random(config.heads, d_model, d_a,
                     derive_seed(config.seed, kInitStream));
}

TrainResult train(std::span<const TrainingInstance> dataset,
                  const TrainConfig& config, CrossAttentionHead initial) {
  config.validate();
  initial.validate();
  if (dataset.empty()) throw InvalidArgument("empty training dataset");

  Pcg64 rng(config.seed);
  TrainResult result{std::move(initial), {}};
  AdamOptimizer adam(result.head, config.adam_beta1, config.adam_beta2,
                     config.adam_eps);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(dataset.size());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));

    // Per-epoch document order, drawn up front so the stream does not
    // depend on thread scheduling.
    std::vector<std::vector<std::size_t>> doc_orders(dataset.size());
    if (config.shuffle_docs_each_epoch) {
      for (std::size_t idx : order) {
        auto& p = doc_orders[idx];
        p.resize(dataset[idx].labels.size());
        std::iota(p.begin(), p.end(), 0);
        rng.shuffle(std::span(p));
      }
    }

    EpochLoss log{epoch, 0.0, 0.0, 0.0};
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      std::vector<Gradients> grads(end - begin);
      auto work = [&](std::size_t k) {
        const auto& instance = dataset[order[begin + k]];
        if (config.shuffle_docs_each_epoch) {
          const auto shuffled =
              permute_documents(instance, doc_orders[order[begin + k]]);
          grads[k] = compute_gradients(shuffled.bundle, result.head,
                                       shuffled.labels, config.lambda);
        } else {
          grads[k] = compute_gradients(instance.bundle, result.head,
                                       instance.labels, config.lambda);
        }
      };
      if (config.threads > 1 && grads.size() > 1) {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(grads.size());
        for (std::size_t k = 0; k < grads.size(); ++k) {
          pool.emplace_back([&, k] {
            try {
              work(k);
            } catch (...) {
              errors[k] = std::current_exception();
            }
          });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
          if (e) std::rethrow_exception(e);
        }
      } else {
        for (std::size_t k = 0; k < grads.size(); ++k) work(k);
      }

      const double inv = 1.0 / static_cast<double>(grads.size());
      std::vector<Matrix> d_query = grads[0].d_query;
      std::vector<Matrix> d_key = grads[0].d_key;
      double batch_loss = grads[0].loss.total;
      for (std::size_t k = 1; k < grads.size(); ++k) {
        for (int h = 0; h < result.head.heads; ++h) {
          d_query[h] += grads[k].d_query[h];
          d_key[h] += grads[k].d_key[h];
        }
        batch_loss += grads[k].loss.total;
      }
      if (!std::isfinite(batch_loss)) {
        throw Numerical("training diverged at step " +
                        std::to_string(adam.steps() + 1));
      }
      for (int h = 0; h < result.head.heads; ++h) {
        d_query[h] *= inv;
        d_key[h] *= inv;
      }
      for (const auto& g : grads) {
        log.l_doc += g.loss.l_doc;
        log.l_ins += g.loss.l_ins;
        log.total += g.loss.total;
      }
      adam.step(result.head, d_query, d_key, config.learning_rate);
    }
    const double n = static_cast<double>(dataset.size());
    log.l_doc /= n;
    log.l_ins /= n;
    log.total /= n;
    result.epochs.push_back(log);
  }
  return result;
}

void write_loss_csv(std::ostream& out, std::span<const EpochLoss> epochs) {
  out << "epoch,l_doc,l_ins,total\n";
  out << std::setprecision(10);
  for (const auto& e : epochs) {
    out << e.epoch << ',' << e.l_doc << ',' << e.l_ins << ',' << e.total
        << '\n';
  }
}

}  // namespace attncomp
