#include "bseg/checkpoint.h"

#include <fstream>
#include <limits>
#include <sstream>

#include "bseg/binary_io.h"
#include "bseg/errors.h"

namespace bseg {

void save_model(std::ostream& out, const GcnModel& model) {
  const GcnConfig& c = model.config;
  if (model.step > std::numeric_limits<uint32_t>::max()) {
    throw DataError("step counter does not fit the checkpoint format");
  }
  binio::put_magic(out, "BGM1");
  binio::put_uint<uint32_t>(out, static_cast<uint32_t>(model.input_dim));
  binio::put_uint<uint32_t>(out, static_cast<uint32_t>(c.num_classes));
  binio::put_uint<uint32_t>(out, static_cast<uint32_t>(c.hidden_channels.size()));
  for (int h : c.hidden_channels) binio::put_uint<uint32_t>(out, static_cast<uint32_t>(h));
  for (double v : {c.dropout_rate, c.l2_coeff, c.learning_rate, c.adam_beta1, c.adam_beta2,
                   c.adam_epsilon}) {
    binio::put_f64(out, v);
  }
  binio::put_uint<uint32_t>(out, c.seed);
  binio::put_uint<uint32_t>(out, static_cast<uint32_t>(model.step));
  for (const auto& layer : model.layers) {
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      binio::put_f32(out, static_cast<float>(layer.weight.data()[i]));
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      binio::put_f32(out, static_cast<float>(layer.bias[i]));
    }
  }
  if (!out) throw DataError("failed writing checkpoint");
}

void save_model(const std::string& path, const GcnModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save_model(out, model);
}

GcnModel load_model(std::istream& in) {
  binio::expect_magic(in, "BGM1");
  GcnConfig c;
  const uint32_t input_dim = binio::get_uint<uint32_t>(in);
  c.num_classes = static_cast<int>(binio::get_uint<uint32_t>(in));
  const uint32_t num_hidden = binio::get_uint<uint32_t>(in);
  if (num_hidden == 0 || num_hidden > 1024) throw DataError("implausible hidden layer count");
  c.hidden_channels.resize(num_hidden);
  for (auto& h : c.hidden_channels) h = static_cast<int>(binio::get_uint<uint32_t>(in));
  c.dropout_rate = binio::get_f64(in);
  c.l2_coeff = binio::get_f64(in);
  c.learning_rate = binio::get_f64(in);
  c.adam_beta1 = binio::get_f64(in);
  c.adam_beta2 = binio::get_f64(in);
  c.adam_epsilon = binio::get_f64(in);
  c.seed = binio::get_uint<uint32_t>(in);
  const uint32_t step = binio::get_uint<uint32_t>(in);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint config invalid: ") + e.what());
  }

  GcnModel m(static_cast<int>(input_dim), c);
  m.step = step;
  for (auto& layer : m.layers) {
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = binio::get_f32(in);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = binio::get_f32(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in checkpoint");
  return m;
}

GcnModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_model(in);
}

GcnModel round_trip(const GcnModel& model) {
  std::stringstream buf;
  save_model(buf, model);
  return load_model(buf);
}

}  // namespace bseg
