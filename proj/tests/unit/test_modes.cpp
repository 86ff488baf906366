#include <gtest/gtest.h>

#include "dcx/error.hpp"
#include "dcx/modes/modes.hpp"
#include "dcx/qot/ber.hpp"
#include "dcx/units.hpp"
#include "support/fixtures.hpp"

using namespace dcx;
using namespace dcx::modes;

namespace {

netmodel::ModeSpec spec(const std::string& id, double rate, netmodel::Modulation m, double baud, const std::string& fec) {
  netmodel::ModeSpec s;
  s.id = id;
  s.bitrate_gbps = rate;
  s.modulation = m;
  s.symbol_rate_gbaud = baud;
  s.fec = fec;
  return s;
}

ModeCatalog catalog(const std::string& trx, std::vector<netmodel::ModeSpec> modes, const std::string& probe) {
  netmodel::CatalogSpec c;
  c.id = trx + "-cat";
  c.modes = std::move(modes);
  c.probe_mode_id = probe;
  return make_catalog(trx, c);
}

const auto k400 = spec("400G-16QAM-64G-oFEC", 400, netmodel::Modulation::QAM16, 64, "oFEC");
const auto k200 = spec("200G-QPSK-64G-oFEC", 200, netmodel::Modulation::QPSK, 64, "oFEC");
const auto k100 = spec("100G-QPSK-32G-oFEC", 100, netmodel::Modulation::QPSK, 32, "oFEC");

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::NotFound;
}

const qot::TrxNoiseModel kQuiet{};

}  // namespace

TEST(Mode, RequiredSnrFromFecThreshold) {
  const auto m = make_mode(k400);
  EXPECT_NEAR(m.required_snr, qot::snr_from_ber(2e-2, qot::constants_for(netmodel::Modulation::QAM16)), 1e-12);
  EXPECT_NEAR(units::lin_to_db(make_mode(k200).required_snr), 6.2509, 1e-4);
}

TEST(Intersect, IdenticalCatalogs) {
  const auto a = catalog("a", {k400, k200, k100}, k200.id);
  EXPECT_EQ(intersect_catalogs(a, a).size(), 3u);
}

TEST(Intersect, DisjointFec) {
  auto other = k200;
  other.fec = "SD-FEC";
  EXPECT_TRUE(intersect_catalogs(catalog("a", {k200}, k200.id), catalog("b", {other}, other.id)).empty());
}

TEST(Intersect, SubsetGivesTheSharedMode) {
  const auto common = intersect_catalogs(catalog("a", {k400, k200}, k200.id), catalog("b", {k200}, k200.id));
  ASSERT_EQ(common.size(), 1u);
  EXPECT_EQ(common[0].id, k200.id);
}

TEST(Intersect, VendorIdsDoNotMatter) {
  const auto t = dcx::testing::load_fixture("mesh5.json");
  const auto common = intersect_catalogs(catalog_for(t, "trxA"), catalog_for(t, "trxB"));
  ASSERT_EQ(common.size(), 3u);
  EXPECT_EQ(common[0].id, "X-400G-16QAM");
}

TEST(Select, ConcatenationExamplePicksQpsk) {
  const auto common = intersect_catalogs(catalog("a", {k400, k200}, k200.id), catalog("b", {k400, k200}, k200.id));
  const auto m = select_mode(common, units::db_to_lin(12.337), kQuiet, 1.0, 1.0);
  EXPECT_EQ(m.id, k200.id);
}

TEST(Select, UnlimitedGsnrPicksHighestBitrate) {
  const auto common = intersect_catalogs(catalog("a", {k100, k200, k400}, k200.id), catalog("b", {k400, k200, k100}, k200.id));
  EXPECT_EQ(select_mode(common, units::kInfinity, kQuiet, 1.0).id, k400.id);
}

TEST(Select, RxPowerBelowEveryWindow) {
  const auto common = intersect_catalogs(catalog("a", {k400, k200}, k200.id), catalog("b", {k400, k200}, k200.id));
  EXPECT_EQ(code_of([&] { select_mode(common, 1e6, kQuiet, units::dbm_to_mw(-40.0)); }), Errc::NoFeasibleMode);
}

TEST(Select, MarginIsRespected) {
  const auto common = intersect_catalogs(catalog("a", {k400, k200}, k200.id), catalog("b", {k400, k200}, k200.id));
  const double req16 = units::lin_to_db(make_mode(k400).required_snr);
  EXPECT_EQ(select_mode(common, units::db_to_lin(req16 + 1.01), kQuiet, 1.0, 1.0).id, k400.id);
  EXPECT_EQ(select_mode(common, units::db_to_lin(req16 + 0.99), kQuiet, 1.0, 1.0).id, k200.id);
}

TEST(ProbePlan, SharedProbeCapability) {
  const auto a = catalog("a", {k400, k200}, k400.id);
  const auto b = catalog("b", {k400, k200}, k400.id);
  EXPECT_EQ(probe_plan(a, b).id, k400.id);
}

TEST(ProbePlan, MismatchedProbesUseHardestCommonMode) {
  const auto a = catalog("a", {k400, k200, k100}, k400.id);
  const auto b = catalog("b", {k400, k200, k100}, k100.id);
  EXPECT_EQ(probe_plan(a, b).id, k400.id);
}

TEST(ProbePlan, EmptyIntersection) {
  auto other = k200;
  other.fec = "SD-FEC";
  EXPECT_EQ(code_of([&] { probe_plan(catalog("a", {k200}, k200.id), catalog("b", {other}, other.id)); }),
            Errc::NoCommonMode);
}

TEST(SortModes, CanonicalOrder) {
  std::vector<TrxMode> m{make_mode(k100), make_mode(k400), make_mode(k200)};
  sort_modes(m);
  EXPECT_EQ(m[0].id, k400.id);
  EXPECT_EQ(m[1].id, k200.id);
  EXPECT_EQ(m[2].id, k100.id);
}
