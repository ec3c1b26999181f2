#include "ltc/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace ltc {

namespace {

constexpr char kMagic[8] = {'L', 'T', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_doubles(std::ostream& out, const std::vector<double>& d) {
  write_u64(out, d.size());
  out.write(reinterpret_cast<const char*>(d.data()),
            static_cast<std::streamsize>(d.size() * sizeof(double)));
}

uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw Error("checkpoint: truncated file");
  return v;
}

double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw Error("checkpoint: truncated file");
  return v;
}

std::string read_string(std::istream& in) {
  const uint64_t n = read_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error("checkpoint: truncated file");
  return s;
}

std::vector<double> read_doubles(std::istream& in) {
  const uint64_t n = read_u64(in);
  std::vector<double> d(n);
  in.read(reinterpret_cast<char*>(d.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw Error("checkpoint: truncated file");
  return d;
}

void write_net(std::ostream& out, const NetworkParams& net) {
  write_u64(out, static_cast<uint64_t>(net.role));
  write_u64(out, static_cast<uint64_t>(net.point_layers));
  write_u64(out, net.layers.size());
  for (const auto& l : net.layers) {
    write_string(out, l.name);
    write_u64(out, static_cast<uint64_t>(l.weight.shape[0]));
    write_u64(out, static_cast<uint64_t>(l.weight.shape[1]));
    write_doubles(out, l.weight.data);
    write_doubles(out, l.bias.data);
  }
}

NetworkParams read_net(std::istream& in) {
  NetworkParams net;
  net.role = static_cast<Role>(read_u64(in));
  net.point_layers = static_cast<int>(read_u64(in));
  const uint64_t n_layers = read_u64(in);
  for (uint64_t i = 0; i < n_layers; ++i) {
    DenseLayer l;
    l.name = read_string(in);
    const int rows = static_cast<int>(read_u64(in));
    const int cols = static_cast<int>(read_u64(in));
    l.weight = Tensor({rows, cols}, read_doubles(in));
    l.bias = Tensor({cols}, read_doubles(in));
    net.layers.push_back(std::move(l));
  }
  return net;
}

void write_opt(std::ostream& out, const RoleOptState& o) {
  write_u64(out, o.spec.kind == OptKind::Adam ? 0 : 1);
  write_f64(out, o.spec.lr);
  write_u64(out, o.adam.initialized() ? 1 : 0);
  if (o.adam.initialized()) {
    write_f64(out, o.adam.lr);
    write_f64(out, o.adam.beta1);
    write_f64(out, o.adam.beta2);
    write_f64(out, o.adam.eps);
    write_u64(out, static_cast<uint64_t>(o.adam.t));
    write_u64(out, o.adam.m.size());
    for (const Tensor& t : o.adam.m) write_doubles(out, t.data);
    for (const Tensor& t : o.adam.v) write_doubles(out, t.data);
  }
}

RoleOptState read_opt(std::istream& in, const NetworkParams& net) {
  RoleOptState o;
  o.spec.kind = read_u64(in) == 0 ? OptKind::Adam : OptKind::Sgd;
  o.spec.lr = read_f64(in);
  if (read_u64(in) == 1) {
    o.adam.lr = read_f64(in);
    o.adam.beta1 = read_f64(in);
    o.adam.beta2 = read_f64(in);
    o.adam.eps = read_f64(in);
    o.adam.t = static_cast<int64_t>(read_u64(in));
    const uint64_t n = read_u64(in);
    if (n != net.layers.size() * 2)
      throw Error("checkpoint: optimizer state does not match parameters");
    auto read_like = [&in, &net]() {
      std::vector<Tensor> ts;
      for (const auto& l : net.layers) {
        ts.push_back(Tensor(l.weight.shape, read_doubles(in)));
        ts.push_back(Tensor(l.bias.shape, read_doubles(in)));
      }
      return ts;
    };
    o.adam.m = read_like();
    o.adam.v = read_like();
  }
  return o;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainerState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("checkpoint: cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  write_string(out, config_dump(state.config));
  write_u64(out, state.iteration);
  write_net(out, state.model.encoder);
  write_net(out, state.model.decoder);
  write_net(out, state.model.energy);
  write_net(out, state.model.discriminator);
  write_opt(out, state.opt_encoder);
  write_opt(out, state.opt_decoder);
  write_opt(out, state.opt_energy);
  write_opt(out, state.opt_discriminator);
  write_string(out, state.rng_state);
  if (!out) throw Error("checkpoint: write failed for " + path);
}

TrainerState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("checkpoint: " + path + " is not a version-01 checkpoint");
  TrainerState state;
  state.config = config_from_json_text(read_string(in));
  state.iteration = read_u64(in);
  state.model.encoder = read_net(in);
  state.model.decoder = read_net(in);
  state.model.energy = read_net(in);
  state.model.discriminator = read_net(in);
  state.opt_encoder = read_opt(in, state.model.encoder);
  state.opt_decoder = read_opt(in, state.model.decoder);
  state.opt_energy = read_opt(in, state.model.energy);
  state.opt_discriminator = read_opt(in, state.model.discriminator);
  state.rng_state = read_string(in);
  return state;
}

}  // namespace ltc
