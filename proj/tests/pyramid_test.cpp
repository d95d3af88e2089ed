#include "pyramid/pyramid_oram.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "pyramid/errors.hpp"

namespace pyramid {
namespace {

PyramidConfig small_config(std::uint64_t N = 64, std::uint32_t p = 4,
                           std::uint64_t seed = 7) {
  PyramidConfig cfg;
  cfg.capacity = N;
  cfg.first_level_size = p;
  cfg.seed = seed;
  return cfg;
}

// Independent schedule oracle: simulate the binary counter of level
// occupancy directly instead of reading bits off t.
struct ScheduleOracle {
  explicit ScheduleOracle(std::uint32_t levels) : full(levels + 1, false) {
    full[levels] = true;
  }
  // Returns the rebuilt level after an access that fills L0 when `l0_full`.
  int step(bool l0_full) {
    if (!l0_full) return -1;
    const std::uint32_t l = static_cast<std::uint32_t>(full.size()) - 1;
    std::uint32_t i = 1;
    while (i < l && full[i]) {
      full[i] = false;
      ++i;
    }
    full[i] = true;
    return static_cast<int>(i);
  }
  std::vector<bool> full;
};

TEST(PyramidConfigTest, DerivedLevels) {
  PyramidConfig cfg = small_config(1u << 14, 64);
  EXPECT_EQ(cfg.level_count(), 9u);
  EXPECT_EQ(cfg.level(1).n, 64u);
  EXPECT_EQ(cfg.level(1).k, 3u);
  EXPECT_EQ(cfg.level(6).n, 2048u);
  EXPECT_EQ(cfg.level(6).k, 4u);
  EXPECT_EQ(cfg.level(9).n, 1u << 14);
  EXPECT_EQ(default_k(16), 2u);
  EXPECT_EQ(default_k(4), 2u);
  EXPECT_EQ(default_k(1u << 17), 5u);
  for (const auto& lp : cfg.levels()) EXPECT_EQ(lp.c, 4u);
}

TEST(PyramidConfigTest, RejectsBadParameters) {
  PyramidConfig cfg = small_config();
  cfg.capacity = 48;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg = small_config();
  cfg.first_level_size = 128;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg = small_config();
  cfg.first_level_size = 1;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
}

TEST(PyramidConfigTest, JsonRoundTrip) {
  PyramidConfig cfg = small_config(1024, 16, 99);
  cfg.policy = FailurePolicy::kRetry;
  cfg.max_retries = 5;
  const auto j = config_to_json(cfg);
  EXPECT_EQ(j.at("version").get<int>(), kConfigVersion);
  EXPECT_EQ(j.at("levels").size(), cfg.level_count());
  EXPECT_EQ(config_from_json(j), cfg);
  EXPECT_EQ(config_from_json(nlohmann::json::parse(j.dump())), cfg);

  auto bad = j;
  bad["version"] = 99;
  EXPECT_THROW(config_from_json(bad), InvalidParameter);
  bad = j;
  bad["levels"][0]["k"] = 7;
  EXPECT_THROW(config_from_json(bad), InvalidParameter);
  bad = j;
  bad.erase("N");
  EXPECT_THROW(config_from_json(bad), InvalidParameter);
}

TEST(ScheduleTest, FirstLevelSizeFour) {
  const PyramidConfig cfg = small_config(64, 4);
  EXPECT_EQ(rebuild_target(cfg, 1), -1);
  EXPECT_EQ(rebuild_target(cfg, 2), -1);
  EXPECT_EQ(rebuild_target(cfg, 3), -1);
  EXPECT_EQ(rebuild_target(cfg, 4), 1);
  EXPECT_EQ(rebuild_target(cfg, 8), 2);
  EXPECT_EQ(rebuild_target(cfg, 12), 1);
  EXPECT_EQ(rebuild_target(cfg, 16), 3);
  EXPECT_EQ(rebuild_target(cfg, 64), 5);
  EXPECT_EQ(rebuild_target(cfg, 128), 5);
}

TEST(ScheduleTest, MatchesCounterOracleOverThreePeriods) {
  const PyramidConfig cfg = small_config(64, 4);
  ScheduleOracle oracle(cfg.level_count());
  for (std::uint64_t t = 1; t <= 3 * cfg.capacity; ++t) {
    ASSERT_EQ(rebuild_target(cfg, t), oracle.step(t % cfg.first_level_size == 0))
        << "t=" << t;
    for (std::uint32_t i = 1; i <= cfg.level_count(); ++i) {
      ASSERT_EQ(level_nonempty(cfg, t, i), oracle.full[i]) << "t=" << t << " i=" << i;
    }
  }
}

TEST(PyramidOramTest, WriteThenRead) {
  PyramidOram o(small_config());
  const Payload v = payload_from_u64(42);
  EXPECT_FALSE(o.write(5, v).has_value());
  auto got = o.read(5);
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(*got, v);
  EXPECT_EQ(o.real_count(), 1u);
}

TEST(PyramidOramTest, RepeatedReadLeavesDummyInL0) {
  PyramidOram o(small_config(64, 8));
  const Payload v = payload_from_u64(9);
  o.write(3, v);
  EXPECT_EQ(*o.read(3), v);
  EXPECT_EQ(*o.read(3), v);
  const auto l0 = o.level0();
  int dummies = 0, reals = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    dummies += l0[i].is_dummy();
    reals += l0[i].is_real();
  }
  EXPECT_EQ(reals, 1);
  EXPECT_EQ(dummies, 2);
  EXPECT_TRUE(l0[2].is_real());
  EXPECT_EQ(l0[2].key, 3u);
}

TEST(PyramidOramTest, AbsentReadAppendsMarker) {
  PyramidOram o(small_config());
  EXPECT_FALSE(o.read(11).has_value());
  EXPECT_FALSE(o.last_record().found);
  const Slot& s = o.level0()[0];
  EXPECT_TRUE(s.is_real());
  EXPECT_FALSE(s.holds_element());
  EXPECT_EQ(s.key, 11u);
  EXPECT_EQ(o.real_count(), 0u);
  // The second miss is answered by the marker; the old copy becomes a dummy.
  EXPECT_FALSE(o.read(11).has_value());
  EXPECT_TRUE(o.level0()[0].is_dummy());
  EXPECT_FALSE(o.level0()[1].holds_element());
  o.write(11, payload_from_u64(5));
  EXPECT_EQ(*o.read(11), payload_from_u64(5));
  EXPECT_EQ(o.real_count(), 1u);
  EXPECT_EQ(o.validate(), "");
}

TEST(PyramidOramTest, MarkersDroppedAtFullRebuild) {
  const auto cfg = small_config(16, 4);
  PyramidOram o(cfg);
  for (std::uint32_t i = 0; i < 15; ++i) o.read(100 + i);
  o.read(200);
  ASSERT_EQ(o.counter(), 16u);
  EXPECT_EQ(o.last_record().rebuilt_level, static_cast<int>(cfg.level_count()));
  EXPECT_EQ(o.level(cfg.level_count())->real_count(), 0u);
  EXPECT_EQ(o.validate(), "");
}

TEST(PyramidOramTest, MissesDoNotConsumeCapacity) {
  const auto cfg = small_config(16, 4);
  PyramidOram o(cfg);
  for (std::uint32_t i = 0; i < 40; ++i) o.read(1000 + i);
  for (std::uint32_t key = 0; key < 16; ++key) o.write(key, payload_from_u64(key));
  for (std::uint32_t key = 0; key < 16; ++key) EXPECT_EQ(*o.read(key), payload_from_u64(key));
  EXPECT_EQ(o.validate(), "");
}

TEST(PyramidOramTest, EmptyBulkLoadReadsAbsent) {
  const auto cfg = small_config();
  PyramidOram o = PyramidOram::bulk_load({}, cfg);
  for (std::uint32_t i = 1; i < cfg.level_count(); ++i) EXPECT_EQ(o.level(i), nullptr);
  ASSERT_NE(o.level(cfg.level_count()), nullptr);
  EXPECT_EQ(o.level(cfg.level_count())->real_count(), 0u);
  for (std::uint32_t key = 0; key < 10; ++key) EXPECT_FALSE(o.read(key).has_value());
}

TEST(PyramidOramTest, BulkLoadFullCapacity) {
  const auto cfg = small_config(256, 8);
  std::vector<PyramidOram::Element> elems;
  for (std::uint32_t key = 0; key < cfg.capacity; ++key) {
    elems.emplace_back(key * 3 + 1, payload_from_u64(key));
  }
  PyramidOram o = PyramidOram::bulk_load(elems, cfg);
  EXPECT_EQ(o.validate(), "");
  const std::uint64_t first_read = cfg.first_level_size + cfg.level(cfg.level_count()).k;
  for (std::uint32_t key = 0; key < cfg.capacity; ++key) {
    const std::uint64_t t = o.counter();
    auto got = o.read(key * 3 + 1);
    ASSERT_TRUE(got.has_value()) << key;
    EXPECT_EQ(*got, payload_from_u64(key));
    EXPECT_EQ(o.last_record().online_buckets, online_cost(cfg, t));
    if (t == 0) EXPECT_EQ(o.last_record().online_buckets, first_read);
  }
  EXPECT_EQ(o.validate(), "");
}

TEST(PyramidOramTest, BulkLoadRejectsBadInput) {
  const auto cfg = small_config(16, 4);
  std::vector<PyramidOram::Element> dup{{1, {}}, {1, {}}};
  EXPECT_THROW(PyramidOram::bulk_load(dup, cfg), InvalidParameter);
  std::vector<PyramidOram::Element> many(17);
  for (std::uint32_t i = 0; i < 17; ++i) many[i].first = i;
  EXPECT_THROW(PyramidOram::bulk_load(many, cfg), InvalidParameter);
  std::vector<PyramidOram::Element> sentinel{{kSentinelKey, {}}};
  EXPECT_THROW(PyramidOram::bulk_load(sentinel, cfg), InvalidParameter);
}

TEST(PyramidOramTest, CapacityExceededAfterCompletingAccess) {
  const auto cfg = small_config(16, 4);
  PyramidOram o(cfg);
  for (std::uint32_t key = 0; key < 16; ++key) o.write(key, payload_from_u64(key));
  const auto t = o.counter();
  EXPECT_THROW(o.write(100, payload_from_u64(1)), CapacityExceeded);
  EXPECT_EQ(o.counter(), t + 1);
  EXPECT_EQ(o.real_count(), 16u);
  EXPECT_FALSE(o.read(100).has_value());
  EXPECT_EQ(*o.write(3, payload_from_u64(33)), payload_from_u64(3));
  EXPECT_EQ(o.validate(), "");
}

TEST(PyramidOramTest, MatchesReferenceMap) {
  const auto cfg = small_config(1u << 10, 16, 3);
  PyramidOram o(cfg);
  o.enable_search_log(true);
  std::map<std::uint32_t, Payload> ref;
  std::mt19937_64 gen(12345);
  for (std::uint64_t op = 0; op < 3 * cfg.capacity; ++op) {
    const auto key = static_cast<std::uint32_t>(gen() % 1500);
    const bool is_write = gen() % 2 == 0;
    auto it = ref.find(key);
    std::optional<Payload> expect;
    if (it != ref.end()) expect = it->second;
    std::optional<Payload> got;
    if (is_write && (it != ref.end() || ref.size() < cfg.capacity)) {
      const Payload v = payload_from_u64(gen());
      got = o.write(key, v);
      ref[key] = v;
    } else {
      got = o.read(key);
    }
    ASSERT_EQ(got, expect) << "op " << op;
    if (op % 97 == 0) ASSERT_EQ(o.validate(), "") << "op " << op;
  }
  EXPECT_EQ(o.search_key_repeats(), 0u);
  EXPECT_EQ(o.real_count(), ref.size());
}

TEST(PyramidOramTest, CountsMatchClosedForm) {
  const auto cfg = small_config(1u << 10, 16, 5);
  PyramidOram o(cfg);
  std::mt19937_64 gen(77);
  std::uint64_t period_sum = 0;
  for (std::uint64_t op = 0; op < 2 * cfg.capacity; ++op) {
    const std::uint64_t t = o.counter();
    o.write(static_cast<std::uint32_t>(gen() % 900), payload_from_u64(op));
    const auto& r = o.last_record();
    ASSERT_EQ(r.op_index, t);
    ASSERT_EQ(r.online_buckets, online_cost(cfg, t)) << t;
    ASSERT_EQ(r.total_buckets, total_cost(cfg, t)) << t;
    ASSERT_EQ(r.rebuilt_level, rebuild_target(cfg, t + 1));
    if (op >= cfg.capacity) period_sum += r.total_buckets;
  }
  EXPECT_EQ(period_sum, period_cost(cfg));
}

TEST(PyramidOramTest, RecorderSeesSameCount) {
  const auto cfg = small_config(64, 4);
  PyramidOram o(cfg);
  TraceRecorder rec;
  for (std::uint32_t i = 0; i < 40; ++i) {
    const auto before = rec.count();
    o.write(i % 13, payload_from_u64(i), &rec);
    EXPECT_EQ(rec.count() - before, o.last_record().total_buckets);
    EXPECT_EQ(rec.events().size(), rec.count());
  }
}

TEST(PyramidOramTest, ReplayIsBitIdentical) {
  const auto cfg = small_config(256, 8, 21);
  PyramidOram a(cfg), b(cfg);
  TraceRecorder ra, rb;
  for (std::uint32_t i = 0; i < 600; ++i) {
    a.write(i % 50, payload_from_u64(i), &ra);
    b.write(i % 50, payload_from_u64(i), &rb);
  }
  EXPECT_TRUE(std::equal(ra.events().begin(), ra.events().end(), rb.events().begin(),
                         rb.events().end()));
}

TEST(PyramidOramTest, PreRebuildHookSeesSchedule) {
  const auto cfg = small_config(64, 4);
  PyramidOram o(cfg);
  std::vector<std::pair<std::uint32_t, std::uint64_t>> calls;
  o.set_pre_rebuild_hook([&](std::uint32_t lvl, std::uint64_t t) { calls.emplace_back(lvl, t); });
  for (std::uint32_t i = 0; i < 16; ++i) o.read(i);
  ASSERT_EQ(calls.size(), 4u);
  EXPECT_EQ(calls[0], std::make_pair(1u, std::uint64_t{4}));
  EXPECT_EQ(calls[1], std::make_pair(2u, std::uint64_t{8}));
  EXPECT_EQ(calls[2], std::make_pair(1u, std::uint64_t{12}));
  EXPECT_EQ(calls[3], std::make_pair(3u, std::uint64_t{16}));
}

TEST(PyramidOramTest, FaultInjectionIsVisible) {
  const auto cfg = small_config(64, 4);
  PyramidOram o(cfg);
  for (std::uint32_t i = 0; i < 20; ++i) o.write(i, payload_from_u64(i));
  EXPECT_FALSE(o.inject_fault(999));
  ASSERT_TRUE(o.inject_fault(7));
  auto got = o.read(7);
  ASSERT_TRUE(got.has_value());
  EXPECT_NE(*got, payload_from_u64(7));
}

TEST(PyramidOramTest, RetryPolicyBuilds) {
  auto cfg = small_config(256, 8, 4);
  cfg.policy = FailurePolicy::kRetry;
  PyramidOram o(cfg);
  for (std::uint32_t i = 0; i < 300; ++i) o.write(i % 200, payload_from_u64(i));
  EXPECT_EQ(o.validate(), "");
  EXPECT_TRUE(o.last_build_report().success);
}

TEST(PyramidOramTest, RejectsSentinelAndMissingValue) {
  PyramidOram o(small_config());
  EXPECT_THROW(o.read(kSentinelKey), InvalidParameter);
  EXPECT_THROW(o.access(1, Op::kWrite, std::nullopt), InvalidParameter);
}

}  // namespace
}  // namespace pyramid
