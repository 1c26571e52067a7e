#include "ringdrive/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ringdrive/affordance.hpp"

namespace ringdrive {

namespace {

constexpr char kMagic[8] = {'R', 'D', 'Q', 'N', 'C', 'K', 'P', 'T'};

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 8);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(os, bits);
}

void get_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  get_bytes(is, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  get_bytes(is, b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t bits = get_u64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void put_f64_array(std::ostream& os, const std::vector<double>& a) {
  put_u64(os, a.size());
  for (double d : a) put_f64(os, d);
}

std::vector<double> get_f64_array(std::istream& is, std::size_t expect) {
  std::uint64_t n = get_u64(is);
  if (n != expect) throw std::runtime_error("checkpoint: array size mismatch");
  std::vector<double> a(n);
  for (auto& d : a) d = get_f64(is);
  return a;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  put_bytes(os, kMagic, sizeof kMagic);
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(c.net.arch.size()));
  for (int w : c.net.arch) put_u32(os, static_cast<std::uint32_t>(w));
  put_u64(os, affordance_ordering_hash());
  put_f64(os, c.net.leak);
  put_f64_array(os, c.net.theta);
  if (c.adam) {
    os.put(1);
    put_f64(os, c.adam->lr);
    put_f64(os, c.adam->beta1);
    put_f64(os, c.adam->beta2);
    put_f64(os, c.adam->eps);
    put_u64(os, static_cast<std::uint64_t>(c.adam->step));
    put_f64_array(os, c.adam->m);
    put_f64_array(os, c.adam->v);
  } else {
    os.put(0);
  }
  put_u64(os, static_cast<std::uint64_t>(c.episodes_completed));
  if (c.rng_state) {
    os.put(1);
    put_u64(os, c.rng_state->size());
    put_bytes(os, c.rng_state->data(), c.rng_state->size());
  } else {
    os.put(0);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  get_bytes(is, magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  std::uint32_t version = get_u32(is);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported format version");
  }
  std::uint32_t n_layers = get_u32(is);
  if (n_layers < 2 || n_layers > 64) throw std::runtime_error("checkpoint: bad architecture");
  std::vector<int> arch(n_layers);
  for (auto& w : arch) w = static_cast<int>(get_u32(is));
  std::uint64_t hash = get_u64(is);
  if (hash != affordance_ordering_hash()) {
    throw std::runtime_error("checkpoint: feature-order hash mismatch");
  }
  double leak = get_f64(is);
  Checkpoint c;
  c.net = QNetwork::zeros(arch, leak);
  c.net.theta = get_f64_array(is, QNetwork::param_count(arch));
  char has_adam = 0;
  get_bytes(is, &has_adam, 1);
  if (has_adam) {
    AdamState st;
    st.lr = get_f64(is);
    st.beta1 = get_f64(is);
    st.beta2 = get_f64(is);
    st.eps = get_f64(is);
    st.step = static_cast<long long>(get_u64(is));
    st.m = get_f64_array(is, c.net.theta.size());
    st.v = get_f64_array(is, c.net.theta.size());
    c.adam = std::move(st);
  }
  c.episodes_completed = static_cast<std::int64_t>(get_u64(is));
  char has_rng = 0;
  get_bytes(is, &has_rng, 1);
  if (has_rng) {
    std::uint64_t len = get_u64(is);
    if (len > (1u << 20)) throw std::runtime_error("checkpoint: oversized rng state");
    std::string s(len, '\0');
    get_bytes(is, s.data(), len);
    c.rng_state = std::move(s);
  }
  return c;
}

}  // namespace ringdrive
