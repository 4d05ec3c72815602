#pragma once

#include <string>

#include <json.hpp>

#include "cbf/model.hpp"

namespace cbf {

using json = nlohmann::json;

// {K, Nt, eta, delta, sigma2[], P[], eps[], Q}: Q is a K x K row-major array
// of Nt x Nt matrices whose entries are [re, im] pairs.
json to_json(const ChannelSet& cs);
// Throws std::invalid_argument on missing fields or a set that fails validate().
ChannelSet channel_set_from_json(const json& j);

json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j, int rows, int cols);
json vector_to_json(const CVector& v);
CVector vector_from_json(const json& j, int n);

// Vector beamformers under "w" (one list of [re, im] per transmitter), or
// PSD matrices under "W".
json to_json(const BeamformerSet& bf);
BeamformerSet beamformers_from_json(const json& j, int K, int Nt);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

ChannelSet load_channel_set(const std::string& path);
void save_channel_set(const ChannelSet& cs, const std::string& path);

}  // namespace cbf
