#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "cbf/io.hpp"

using namespace cbf;

TEST_CASE("channel set json round trip is exact") {
  ChannelSetOptions o;
  o.sigma2 = 0.1;
  o.eps = 0.05;
  const auto cs = generate_channel_set(3, 2, 0.4, 2, 8, o);
  const json j = to_json(cs);
  CHECK(j["Q"].size() == 3);
  CHECK(j["Q"][0][1][1][0].size() == 2);
  const auto back = channel_set_from_json(json::parse(j.dump()));
  CHECK(back.K == 3);
  CHECK(back.Nt == 2);
  CHECK(back.eta == cs.eta);
  CHECK(back.sigma2 == cs.sigma2);
  CHECK(back.eps == cs.eps);
  for (size_t l = 0; l < cs.Q.size(); ++l) CHECK(back.Q[l] == cs.Q[l]);

  const auto path = (std::filesystem::temp_directory_path() / "cbf_io_test.json").string();
  save_channel_set(cs, path);
  const auto file = load_channel_set(path);
  for (size_t l = 0; l < cs.Q.size(); ++l) CHECK(file.Q[l] == cs.Q[l]);
  std::remove(path.c_str());
}

TEST_CASE("malformed channel sets are rejected") {
  const auto cs = generate_channel_set(2, 2, 0.4, 1, 9);
  json j = to_json(cs);
  json missing = j;
  missing.erase("sigma2");
  CHECK_THROWS_AS(channel_set_from_json(missing), std::invalid_argument);
  json short_p = j;
  short_p["P"] = {1.0};
  CHECK_THROWS_AS(channel_set_from_json(short_p), std::invalid_argument);
  json skew = j;
  skew["Q"][0][0][0][1] = {0.3, 0.0};
  CHECK_THROWS_AS(channel_set_from_json(skew), std::invalid_argument);
  json not_pair = j;
  not_pair["Q"][1][1][0][0] = 1.0;
  CHECK_THROWS_AS(channel_set_from_json(not_pair), std::invalid_argument);
  json eps = j;
  eps["eps"] = {0.1, 1.0};
  CHECK_THROWS_AS(channel_set_from_json(eps), std::invalid_argument);
  CHECK_THROWS_AS(read_json_file("/nonexistent/cbf.json"), std::runtime_error);
}

TEST_CASE("beamformer json round trip") {
  std::vector<CVector> w(2, CVector::Zero(3));
  w[0] << Complex(0.1, -0.2), Complex(0.3, 0.0), Complex(-1.0, 2.0);
  w[1] << Complex(0.0, 1.0), Complex(0.5, 0.5), Complex(0.0, 0.0);
  const auto bf = BeamformerSet::from_vectors(w);
  const auto back = beamformers_from_json(json::parse(to_json(bf).dump()), 2, 3);
  REQUIRE(back.form == BeamformerSet::Form::kVectors);
  CHECK(back.w[0] == w[0]);
  CHECK(back.w[1] == w[1]);

  const auto m = bf.as_matrices();
  const auto mback = beamformers_from_json(to_json(m), 2, 3);
  REQUIRE(mback.form == BeamformerSet::Form::kMatrices);
  CHECK((mback.W[0] - m.W[0]).norm() < 1e-15);
  CHECK_THROWS_AS(beamformers_from_json(to_json(bf), 3, 3), std::invalid_argument);
  CHECK_THROWS_AS(beamformers_from_json(json::object(), 2, 3), std::invalid_argument);
}
