#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dnrom/errors.hpp"
#include "dnrom/io.hpp"
#include "dnrom/polynomial_model.hpp"
#include "dnrom/spectrum.hpp"

using namespace dnrom;

namespace {

DnfBuild demo_build(int order, const DampingSpec& damping) {
  const auto model = load_polynomial_model(DNROM_DATA "/demo2dof.txt");
  const auto sp = solve_modes(model, 2);
  DnfOptions opt;
  opt.order = order;
  opt.damping = damping;
  return build_dnf(model, sp, {0, 1}, opt);
}

}  // namespace

TEST(IoTest, ConfigDefaultsAndOverrides) {
  const auto c = parse_config(R"(
[beam]
elements = 40
[dnf]
masters = [1, 3]
order = 2
resonances = ["3,1,1,1"]
[damping]
zeta_k_s = 1.3e-5
[rom]
variant = "o2"
nonlinear_damping = "self"
[hbm]
harmonics = 15
amplitude_max_m = 0.012
)");
  EXPECT_EQ(c.beam.n_elements, 40);
  EXPECT_EQ(c.beam.length, 1.0);
  EXPECT_EQ(c.masters, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.order, 2);
  EXPECT_EQ(c.resonances.size(), 1u);
  EXPECT_EQ(c.damping.zeta_k, 1.3e-5);
  EXPECT_EQ(c.variant, RomVariant::o2_full);
  EXPECT_EQ(c.nonlinear_damping, NonlinearDamping::self);
  EXPECT_EQ(c.hbm.harmonics, 15);
  EXPECT_EQ(c.hbm.amplitude_max, 0.012);
  EXPECT_EQ(c.hbm.step, HbmConfig{}.step);
}

TEST(IoTest, ConfigRejectsBadInput) {
  EXPECT_THROW(parse_config("[model]\nkind = \"shell\"\n"), ValidationError);
  EXPECT_THROW(parse_config("[dnf]\nmasters = [13]\n"), ValidationError);
  EXPECT_THROW(parse_config("[dnf]\norder = 4\n"), ValidationError);
  EXPECT_THROW(parse_config("[beam]\nelements = \"x\"\n"), ValidationError);
  EXPECT_THROW(parse_config("[beam\n"), ValidationError);
  EXPECT_THROW(parse_config("[damping]\nzeta_k_s = -1.0\n"), ValidationError);
}

TEST(IoTest, ResolvedSettingsRoundTrip) {
  RunConfig c;
  c.masters = {1, 2};
  c.damping.zeta_m = 0.5;
  c.hbm.tolerance = 1e-11;
  c.resonances = {"3:1(1,2)"};
  const auto back = parse_config(config_to_toml(c));
  EXPECT_EQ(back.masters, c.masters);
  EXPECT_EQ(back.damping.zeta_m, 0.5);
  EXPECT_EQ(back.hbm.tolerance, 1e-11);
  EXPECT_EQ(back.resonances, c.resonances);
  EXPECT_EQ(config_to_toml(back), config_to_toml(c));
}

TEST(IoTest, ArchiveRoundTripIsExact) {
  for (int order : {2, 3}) {
    const auto b = demo_build(order, DampingSpec{0.02, 1e-3});
    const auto ar = make_archive(b);
    std::stringstream s;
    write_archive(s, ar);
    const std::string first = s.str();
    const auto back = read_archive(s);
    std::stringstream again;
    write_archive(again, back);
    EXPECT_EQ(first, again.str());

    RomOptions opt;
    opt.variant = order == 3 ? RomVariant::o3 : RomVariant::o2_full;
    const auto r1 = assemble_rom(b, opt);
    const auto r2 = assemble_rom(back.tensors, back.reduced, opt);
    ASSERT_EQ(r1.monomials.size(), r2.monomials.size());
    for (std::size_t m = 0; m < r1.monomials.size(); ++m) {
      EXPECT_EQ(r1.monomials[m].eq, r2.monomials[m].eq);
      EXPECT_EQ(r1.monomials[m].rexp, r2.monomials[m].rexp);
      EXPECT_EQ(r1.monomials[m].sexp, r2.monomials[m].sexp);
      EXPECT_EQ(r1.monomials[m].coefficient, r2.monomials[m].coefficient);
    }
    EXPECT_EQ(r1.variant, r2.variant);
    Vector R(2), S(2);
    R << 0.1, -0.05;
    S << 0.02, 0.03;
    const auto x1 = reconstruct(b.tensors, R, S, order, true);
    const auto x2 = reconstruct(back.tensors, R, S, order, true);
    EXPECT_EQ((x1.X - x2.X).norm(), 0.0);
    EXPECT_EQ((x1.Y - x2.Y).norm(), 0.0);
  }
}

TEST(IoTest, ArchiveRejectsTruncation) {
  const auto b = demo_build(2, DampingSpec{});
  std::stringstream s;
  write_archive(s, make_archive(b));
  std::string text = s.str();
  text = text.substr(0, text.rfind("end"));
  std::stringstream cut(text);
  EXPECT_THROW(read_archive(cut), ValidationError);
  std::stringstream junk("format 1\nbogus 1 2\nend\n");
  EXPECT_THROW(read_archive(junk), ValidationError);
}

TEST(IoTest, ManifestRecordsDigests) {
  const auto dir = std::filesystem::temp_directory_path() / "dnrom_io_test";
  std::filesystem::create_directories(dir);
  const std::string out = (dir / "x.csv").string();
  std::ofstream(out) << "a_m\n1\n";
  Manifest m;
  m.command = "eig";
  m.outputs = {out};
  m.settings = "x = 1\n";
  write_manifest((dir / "m.json").string(), m);
  std::ifstream in(dir / "m.json");
  std::stringstream s;
  s << in.rdbuf();
  EXPECT_NE(s.str().find(fnv1a_hex("a_m\n1\n")), std::string::npos);
  EXPECT_NE(s.str().find("\"exit_code\": 0"), std::string::npos);
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}
