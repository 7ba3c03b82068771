// SPDX-License-Identifier: Apache-2.0
#include "hfseq/synthetic.hpp"

namespace hfseq {

SyntheticTask::Kind synthetic_kind_from_string(const std::string& s) {
  if (s == "periodic_text") return SyntheticTask::Kind::periodic_text;
  if (s == "bracket_language") return SyntheticTask::Kind::bracket_language;
  if (s == "marked_addition") return SyntheticTask::Kind::marked_addition;
  throw ConfigError("unknown synthetic task '" + s + "'");
}

std::string to_string(SyntheticTask::Kind k) {
  switch (k) {
    case SyntheticTask::Kind::periodic_text: return "periodic_text";
    case SyntheticTask::Kind::bracket_language: return "bracket_language";
    case SyntheticTask::Kind::marked_addition: return "marked_addition";
  }
  return "?";
}

namespace {

constexpr char kFiller[] = "abcdefghijklmnopqrstuvwxyz Th";

void append_filler(std::string& out, long count, Rng& rng) {
  const std::size_t alphabet = sizeof(kFiller) - 1;
  for (long i = 0; i < count; ++i) out.push_back(kFiller[rng.below(alphabet)]);
}

}  // namespace

std::string generate_text(const SyntheticTask& task, long length, Rng& rng) {
  if (length <= 0) return {};
  std::string out;
  out.reserve(length);
  switch (task.kind) {
    case SyntheticTask::Kind::periodic_text: {
      if (task.period.empty()) throw ConfigError("periodic_text needs a non-empty period");
      while (static_cast<long>(out.size()) < length)
        out.append(task.period, 0, std::min<std::size_t>(task.period.size(),
                                                         length - out.size()));
      break;
    }
    case SyntheticTask::Kind::bracket_language: {
      if (task.span < task.min_gap + 4)
        throw ConfigError("bracket_language span must be at least min_gap + 4");
      if (task.outside_min < 0 || task.outside_max < task.outside_min)
        throw ConfigError("bracket_language outside range is invalid");
      while (static_cast<long>(out.size()) < length) {
        const long outside =
            task.outside_min + static_cast<long>(rng.below(task.outside_max - task.outside_min + 1));
        append_filler(out, outside, rng);
        const long gap =
            task.min_gap + static_cast<long>(rng.below(task.span - 4 - task.min_gap + 1));
        out += "[[";
        append_filler(out, gap, rng);
        out += "]]";
      }
      out.resize(length);
      break;
    }
    case SyntheticTask::Kind::marked_addition:
      throw ConfigError("marked_addition is not a text task");
  }
  return out;
}

Batch generate_marked_addition(int T, int n, Rng& rng) {
  if (T < 2) throw ConfigError("marked_addition needs T >= 2");
  if (n < 1) throw ConfigError("marked_addition needs n >= 1");
  Batch b;
  b.T = T;
  b.n = n;
  b.input_dense.assign(T, Matrix::Zero(2, n));
  b.target_dense.assign(T, Matrix::Zero(1, n));
  b.loss_weight.assign(T, 0.0);
  b.loss_weight[T - 1] = 1.0;
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < T; ++t) b.input_dense[t](0, j) = rng.uniform();
    // two distinct marked positions, never the final step
    const int p1 = static_cast<int>(rng.below(T - 1));
    int p2 = static_cast<int>(rng.below(T - 2));
    if (p2 >= p1) ++p2;
    b.input_dense[p1](1, j) = 1.0;
    b.input_dense[p2](1, j) = 1.0;
    b.target_dense[T - 1](0, j) = b.input_dense[p1](0, j) + b.input_dense[p2](0, j);
  }
  return b;
}

}  // namespace hfseq
