#include "cbf/io.hpp"

#include <fstream>
#include <stdexcept>

namespace cbf {

namespace {

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<double> real_list(const json& j, const char* key, int n) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field ") + key);
  auto v = j.at(key).get<std::vector<double>>();
  if (static_cast<int>(v.size()) != n) throw std::invalid_argument(std::string(key) + " must have K entries");
  return v;
}

}  // namespace

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) throw std::invalid_argument("matrix has wrong row count");
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) throw std::invalid_argument("matrix has wrong column count");
    for (int c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<size_t>(c)]);
  }
  return m;
}

json vector_to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index a = 0; a < v.size(); ++a) out.push_back({v[a].real(), v[a].imag()});
  return out;
}

CVector vector_from_json(const json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw std::invalid_argument("vector has wrong length");
  CVector v(n);
  for (int a = 0; a < n; ++a) v[a] = complex_from_json(j[static_cast<size_t>(a)]);
  return v;
}

json to_json(const ChannelSet& cs) {
  json j;
  j["K"] = cs.K;
  j["Nt"] = cs.Nt;
  j["eta"] = cs.eta;
  j["delta"] = cs.delta;
  j["sigma2"] = cs.sigma2;
  j["P"] = cs.P;
  j["eps"] = cs.eps;
  json q = json::array();
  for (int k = 0; k < cs.K; ++k) {
    json row = json::array();
    for (int i = 0; i < cs.K; ++i) row.push_back(matrix_to_json(cs.q(k, i)));
    q.push_back(std::move(row));
  }
  j["Q"] = std::move(q);
  return j;
}

ChannelSet channel_set_from_json(const json& j) {
  try {
    ChannelSet cs;
    cs.K = j.at("K").get<int>();
    cs.Nt = j.at("Nt").get<int>();
    if (cs.K < 1 || cs.Nt < 1) throw std::invalid_argument("K and Nt must be positive");
    cs.eta = j.value("eta", 1.0);
    cs.delta = j.value("delta", 1e-5);
    cs.sigma2 = real_list(j, "sigma2", cs.K);
    cs.P = real_list(j, "P", cs.K);
    cs.eps = real_list(j, "eps", cs.K);
    const json& q = j.at("Q");
    if (!q.is_array() || static_cast<int>(q.size()) != cs.K) throw std::invalid_argument("Q must have K rows");
    cs.Q.resize(static_cast<size_t>(cs.K * cs.K));
    for (int k = 0; k < cs.K; ++k) {
      const json& row = q[static_cast<size_t>(k)];
      if (!row.is_array() || static_cast<int>(row.size()) != cs.K) throw std::invalid_argument("Q must have K columns");
      for (int i = 0; i < cs.K; ++i) {
        const CMatrix raw = matrix_from_json(row[static_cast<size_t>(i)], cs.Nt, cs.Nt);
        if (hermitian_error(raw) > 1e-12) throw std::invalid_argument("covariance is not Hermitian");
        cs.q(k, i) = hermitize(raw);
      }
    }
    cs.validate();
    return cs;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed channel set: ") + e.what());
  }
}

json to_json(const BeamformerSet& bf) {
  json j;
  json list = json::array();
  if (bf.form == BeamformerSet::Form::kVectors) {
    for (const auto& w : bf.w) list.push_back(vector_to_json(w));
    j["w"] = std::move(list);
  } else {
    for (const auto& W : bf.W) list.push_back(matrix_to_json(W));
    j["W"] = std::move(list);
  }
  return j;
}

BeamformerSet beamformers_from_json(const json& j, int K, int Nt) {
  try {
    if (j.contains("w")) {
      const json& list = j.at("w");
      if (!list.is_array() || static_cast<int>(list.size()) != K) throw std::invalid_argument("w must hold K vectors");
      std::vector<CVector> w;
      for (int i = 0; i < K; ++i) w.push_back(vector_from_json(list[static_cast<size_t>(i)], Nt));
      return BeamformerSet::from_vectors(std::move(w));
    }
    if (j.contains("W")) {
      const json& list = j.at("W");
      if (!list.is_array() || static_cast<int>(list.size()) != K) throw std::invalid_argument("W must hold K matrices");
      std::vector<CMatrix> W;
      for (int i = 0; i < K; ++i) W.push_back(hermitize(matrix_from_json(list[static_cast<size_t>(i)], Nt, Nt)));
      return BeamformerSet::from_matrices(std::move(W));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed beamformers: ") + e.what());
  }
  throw std::invalid_argument("beamformer file needs a \"w\" or \"W\" field");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

ChannelSet load_channel_set(const std::string& path) { return channel_set_from_json(read_json_file(path)); }

void save_channel_set(const ChannelSet& cs, const std::string& path) {
  write_text_file(path, to_json(cs).dump(1) + "\n");
}

}  // namespace cbf
