#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "cli.hpp"
#include "pyramid/errors.hpp"

namespace pyramid::cli {

namespace {

constexpr std::uint64_t kZipfMaxKeys = 1u << 24;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<Request> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open trace file: " + path);
  std::vector<Request> out;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    Request r;
    std::string_view key_part = s;
    const auto comma = s.find(',');
    if (comma != std::string_view::npos) {
      key_part = trim(s.substr(0, comma));
      const std::string_view op = trim(s.substr(comma + 1));
      if (op == "w" || op == "W") {
        r.op = Op::kWrite;
      } else if (op != "r" && op != "R") {
        throw InvalidParameter("trace line " + std::to_string(line_no) +
                               ": op must be r or w");
      }
    }
    const auto [end, ec] =
        std::from_chars(key_part.data(), key_part.data() + key_part.size(), r.key);
    if (ec != std::errc{} || end != key_part.data() + key_part.size() ||
        r.key > kMaxRealKey) {
      throw InvalidParameter("trace line " + std::to_string(line_no) + ": bad key");
    }
    out.push_back(r);
  }
  if (out.empty()) throw InvalidParameter("trace file holds no requests: " + path);
  return out;
}

}  // namespace

Workload::Workload(const RunConfig& cfg, std::uint64_t seed)
    : kind_(cfg.workload), N_(cfg.N), rng_(Rng::substream(seed, 1)) {
  switch (kind_) {
    case WorkloadKind::kZipf: {
      if (N_ > kZipfMaxKeys) throw InvalidParameter("zipf workload supports N <= 2^24");
      if (!(cfg.zipf_theta >= 0.0)) throw InvalidParameter("zipf theta must be >= 0");
      zipf_cdf_.resize(N_);
      double total = 0.0;
      for (std::uint64_t r = 0; r < N_; ++r) {
        total += std::pow(static_cast<double>(r + 1), -cfg.zipf_theta);
        zipf_cdf_[r] = total;
      }
      for (auto& v : zipf_cdf_) v /= total;
      break;
    }
    case WorkloadKind::kSparseIndexTrace:
      replay_ = load_trace(cfg.trace_file);
      break;
    default:
      break;
  }
}

Request Workload::next() {
  const std::uint64_t i = i_++;
  Request r;
  switch (kind_) {
    case WorkloadKind::kUniform:
      r.key = static_cast<std::uint32_t>(rng_.uniform(N_));
      r.op = (rng_.next() & 1) ? Op::kWrite : Op::kRead;
      break;
    case WorkloadKind::kSequential:
      // Even passes over the key space write, odd passes read back.
      r.key = static_cast<std::uint32_t>(i % N_);
      r.op = (i / N_) % 2 == 0 ? Op::kWrite : Op::kRead;
      break;
    case WorkloadKind::kZipf: {
      const double u = rng_.uniform01();
      const auto it = std::upper_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
      r.key = static_cast<std::uint32_t>(
          std::min<std::ptrdiff_t>(it - zipf_cdf_.begin(),
                                   static_cast<std::ptrdiff_t>(N_ - 1)));
      r.op = (rng_.next() & 1) ? Op::kWrite : Op::kRead;
      break;
    }
    case WorkloadKind::kSparseIndexTrace:
      r = replay_[i % replay_.size()];
      break;
  }
  return r;
}

}  // namespace pyramid::cli
