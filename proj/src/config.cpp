#include "pyramid/config.hpp"

#include <bit>
#include "json.hpp"

#include "pyramid/errors.hpp"
#include "pyramid/ozht.hpp"
#include "pyramid/slot.hpp"

namespace pyramid {

std::uint32_t default_k(std::uint32_t n) {
  const std::uint32_t e = static_cast<std::uint32_t>(std::countr_zero(n));
  const std::uint32_t k = e <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(e - 1));
  return std::max<std::uint32_t>(2, k);
}

void PyramidConfig::validate() const {
  if (!std::has_single_bit(capacity) || capacity > (1ull << 31)) {
    throw InvalidParameter("capacity must be a power of two <= 2^31");
  }
  if (!is_power_of_two(first_level_size) || first_level_size < 2) {
    throw InvalidParameter("first level size must be a power of two >= 2");
  }
  if (first_level_size > capacity) {
    throw InvalidParameter("first level size exceeds capacity");
  }
  if (c == 0) throw InvalidParameter("bucket size c must be positive");
  if (k_override > 256) throw InvalidParameter("k must not exceed 256");
  if (policy == FailurePolicy::kRetry && max_retries == 0) {
    throw InvalidParameter("retry policy needs max_retries >= 1");
  }
}

std::uint32_t PyramidConfig::level_count() const {
  return static_cast<std::uint32_t>(std::countr_zero(capacity / first_level_size)) + 1;
}

LevelParams PyramidConfig::level(std::uint32_t i) const {
  if (i < 1 || i > level_count()) throw InvalidParameter("level out of range");
  const std::uint32_t n = first_level_size << (i - 1);
  return {n, k_override != 0 ? k_override : default_k(n), c};
}

std::vector<LevelParams> PyramidConfig::levels() const {
  std::vector<LevelParams> out;
  for (std::uint32_t i = 1; i <= level_count(); ++i) out.push_back(level(i));
  return out;
}

std::string_view to_string(FailurePolicy p) {
  return p == FailurePolicy::kRetry ? "retry" : "strict-abort";
}

FailurePolicy failure_policy_from_string(std::string_view s) {
  if (s == "strict-abort") return FailurePolicy::kStrictAbort;
  if (s == "retry") return FailurePolicy::kRetry;
  throw InvalidParameter("unknown failure policy: " + std::string(s));
}

nlohmann::json config_to_json(const PyramidConfig& cfg) {
  nlohmann::json levels = nlohmann::json::array();
  std::uint32_t i = 1;
  for (const auto& lp : cfg.levels()) {
    levels.push_back({{"level", i++}, {"n", lp.n}, {"k", lp.k}, {"c", lp.c}});
  }
  return {
      {"version", kConfigVersion},
      {"N", cfg.capacity},
      {"p", cfg.first_level_size},
      {"D", kPayloadBytes},
      {"c", cfg.c},
      {"k_override", cfg.k_override},
      {"seed", cfg.seed},
      {"policy", std::string(to_string(cfg.policy))},
      {"max_retries", cfg.max_retries},
      {"levels", levels},
  };
}

PyramidConfig config_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kConfigVersion) {
      throw InvalidParameter("unsupported config version");
    }
    if (j.at("D").get<std::size_t>() != kPayloadBytes) {
      throw InvalidParameter("payload size differs from this build");
    }
    PyramidConfig cfg;
    cfg.capacity = j.at("N").get<std::uint64_t>();
    cfg.first_level_size = j.at("p").get<std::uint32_t>();
    cfg.c = j.at("c").get<std::uint32_t>();
    cfg.k_override = j.value("k_override", 0u);
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.policy = failure_policy_from_string(j.at("policy").get<std::string>());
    cfg.max_retries = j.value("max_retries", 3u);
    cfg.validate();
    if (j.contains("levels")) {
      const auto expect = cfg.levels();
      const auto& got = j.at("levels");
      if (got.size() != expect.size()) {
        throw InvalidParameter("level list does not match N and p");
      }
      for (std::size_t i = 0; i < expect.size(); ++i) {
        const LevelParams lp{got[i].at("n").get<std::uint32_t>(),
                             got[i].at("k").get<std::uint32_t>(),
                             got[i].at("c").get<std::uint32_t>()};
        if (!(lp == expect[i])) {
          throw InvalidParameter("level " + std::to_string(i + 1) +
                                 " parameters disagree with the derived ones");
        }
      }
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("malformed config: ") + e.what());
  }
}

bool level_nonempty(const PyramidConfig& cfg, std::uint64_t t, std::uint32_t i) {
  const std::uint32_t l = cfg.level_count();
  if (i < 1 || i > l) throw InvalidParameter("level out of range");
  if (i == l) return true;
  const std::uint64_t q = (t % cfg.capacity) / cfg.first_level_size;
  return ((q >> (i - 1)) & 1u) != 0;
}

int rebuild_target(const PyramidConfig& cfg, std::uint64_t t) {
  if (t == 0 || t % cfg.first_level_size != 0) return -1;
  const std::uint64_t q = t / cfg.first_level_size;
  const std::uint32_t l = cfg.level_count();
  const std::uint32_t i_star =
      std::min<std::uint32_t>(static_cast<std::uint32_t>(std::countr_zero(q)), l - 1);
  return static_cast<int>(i_star + 1);
}

std::uint64_t online_cost(const PyramidConfig& cfg, std::uint64_t t) {
  std::uint64_t cost = cfg.first_level_size;
  for (std::uint32_t i = 1; i <= cfg.level_count(); ++i) {
    if (level_nonempty(cfg, t, i)) cost += cfg.level(i).k;
  }
  return cost;
}

std::uint64_t rebuild_input_slots(const PyramidConfig& cfg, std::uint32_t target) {
  const std::uint32_t l = cfg.level_count();
  const std::uint32_t last_source = target == l ? l : target - 1;
  std::uint64_t m = cfg.first_level_size;
  for (std::uint32_t j = 1; j <= last_source; ++j) {
    const auto lp = cfg.level(j);
    m += static_cast<std::uint64_t>(lp.k) * lp.n * lp.c;
  }
  return m;
}

std::uint64_t rebuild_cost(const PyramidConfig& cfg, std::uint32_t target) {
  const std::uint32_t l = cfg.level_count();
  const std::uint32_t last_source = target == l ? l : target - 1;
  std::uint64_t reads = cfg.first_level_size;
  for (std::uint32_t j = 1; j <= last_source; ++j) {
    const auto lp = cfg.level(j);
    reads += static_cast<std::uint64_t>(lp.k) * lp.n;
  }
  const auto tp = cfg.level(target);
  return reads + ozht::build_access_count(rebuild_input_slots(cfg, target), tp.n,
                                          tp.k, tp.c);
}

std::uint64_t total_cost(const PyramidConfig& cfg, std::uint64_t t) {
  std::uint64_t cost = online_cost(cfg, t) + 1;
  const int target = rebuild_target(cfg, t + 1);
  if (target > 0) cost += rebuild_cost(cfg, static_cast<std::uint32_t>(target));
  return cost;
}

std::uint64_t period_cost(const PyramidConfig& cfg) {
  std::uint64_t sum = 0;
  for (std::uint64_t t = 0; t < cfg.capacity; ++t) sum += total_cost(cfg, t);
  return sum;
}

double amortized_cost(const PyramidConfig& cfg) {
  return static_cast<double>(period_cost(cfg)) / static_cast<double>(cfg.capacity);
}

}  // namespace pyramid
