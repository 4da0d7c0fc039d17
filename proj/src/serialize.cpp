#include "corrtensor/serialize.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "corrtensor/errors.hpp"

namespace corrtensor {

namespace {

class Writer {
public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path);
  }

  void magic(const char* s) { out_.write(s, static_cast<std::streamsize>(std::strlen(s))); }
  void u32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void u8(std::uint8_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void f64(double v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void doubles(const std::vector<double>& v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void check() {
    if (!out_) throw IoError("model write failed");
  }

private:
  std::ofstream out_;
};

class Reader {
public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open " + path);
  }

  void magic(const char* s) {
    const std::size_t len = std::strlen(s);
    std::string buf(len, '\0');
    in_.read(buf.data(), static_cast<std::streamsize>(len));
    if (!in_ || buf != s) throw IoError(path_ + ": bad model magic");
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    read(&v, sizeof v);
    return v;
  }
  std::uint8_t u8() {
    std::uint8_t v = 0;
    read(&v, sizeof v);
    return v;
  }
  double f64() {
    double v = 0;
    read(&v, sizeof v);
    return v;
  }
  std::vector<double> doubles(std::size_t n) {
    std::vector<double> v(n);
    read(v.data(), n * sizeof(double));
    return v;
  }

private:
  void read(void* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!in_) throw IoError(path_ + ": truncated model file");
  }

  std::ifstream in_;
  std::string path_;
};

void write_params(Writer& w, const std::optional<CorrParams>& params) {
  w.u8(params.has_value() ? 1 : 0);
  if (params) {
    w.f64(params->alpha);
    w.f64(params->beta);
    w.f64(params->lambda);
    w.f64(params->gamma);
    w.f64(params->p);
  }
}

std::optional<CorrParams> read_params(Reader& r) {
  if (r.u8() == 0) return std::nullopt;
  CorrParams p{};
  p.alpha = r.f64();
  p.beta = r.f64();
  p.lambda = r.f64();
  p.gamma = r.f64();
  p.p = r.f64();
  return p;
}

}  // namespace

void save_model(const Decomp2DModel& model, const std::string& path) {
  Writer w(path);
  w.magic(kModel2DMagic);
  w.u32(static_cast<std::uint32_t>(model.mean.rows()));
  w.u32(static_cast<std::uint32_t>(model.mean.cols()));
  w.u32(static_cast<std::uint32_t>(model.left.cols()));
  w.u32(static_cast<std::uint32_t>(model.right.cols()));
  w.u32(static_cast<std::uint32_t>(model.cores.size()));
  write_params(w, model.params);
  w.u8(model.converged ? 1 : 0);
  w.doubles(model.left.data());
  w.doubles(model.right.data());
  w.doubles(model.mean.data());
  for (const Matrix& core : model.cores) w.doubles(core.data());
  w.doubles(model.weights.weights);
  w.doubles(model.weights.residuals);
  w.u32(static_cast<std::uint32_t>(model.trace.size()));
  w.doubles(model.trace);
  w.check();
}

Decomp2DModel load_model(const std::string& path) {
  Reader r(path);
  r.magic(kModel2DMagic);
  const std::size_t a = r.u32(), b = r.u32(), k1 = r.u32(), k2 = r.u32(), n = r.u32();
  Decomp2DModel model;
  model.params = read_params(r);
  model.converged = r.u8() != 0;
  model.left = Matrix(a, k1, r.doubles(a * k1));
  model.right = Matrix(b, k2, r.doubles(b * k2));
  model.mean = Matrix(a, b, r.doubles(a * b));
  model.cores.reserve(n);
  for (std::size_t i = 0; i < n; ++i) model.cores.emplace_back(k1, k2, r.doubles(k1 * k2));
  model.weights.weights = r.doubles(n);
  model.weights.residuals = r.doubles(n);
  model.trace = r.doubles(r.u32());
  return model;
}

void save_tensor_model(const TensorModel& model, const std::string& path) {
  Writer w(path);
  w.magic(kModelTensorMagic);
  const std::size_t order = model.factors.size();
  w.u32(static_cast<std::uint32_t>(order));
  for (std::size_t nmode = 0; nmode < order; ++nmode) {
    w.u32(static_cast<std::uint32_t>(model.factors[nmode].rows()));
  }
  for (std::size_t nmode = 0; nmode < order; ++nmode) {
    w.u32(static_cast<std::uint32_t>(model.factors[nmode].cols()));
  }
  w.u32(static_cast<std::uint32_t>(model.cores.size()));
  write_params(w, model.params);
  w.u8(model.converged ? 1 : 0);
  for (const Matrix& factor : model.factors) w.doubles(factor.data());
  w.doubles(model.mean.data());
  for (const TensorN& core : model.cores) w.doubles(core.data());
  w.doubles(model.weights.weights);
  w.doubles(model.weights.residuals);
  w.u32(static_cast<std::uint32_t>(model.trace.size()));
  w.doubles(model.trace);
  w.check();
}

TensorModel load_tensor_model(const std::string& path) {
  Reader r(path);
  r.magic(kModelTensorMagic);
  const std::size_t order = r.u32();
  std::vector<std::size_t> shape(order), ranks(order);
  for (std::size_t n = 0; n < order; ++n) shape[n] = r.u32();
  for (std::size_t n = 0; n < order; ++n) ranks[n] = r.u32();
  const std::size_t count = r.u32();

  TensorModel model;
  model.params = read_params(r);
  model.converged = r.u8() != 0;
  model.factors.reserve(order);
  for (std::size_t n = 0; n < order; ++n) {
    model.factors.emplace_back(shape[n], ranks[n], r.doubles(shape[n] * ranks[n]));
  }
  std::size_t mean_size = 1, core_size = 1;
  for (std::size_t n = 0; n < order; ++n) {
    mean_size *= shape[n];
    core_size *= ranks[n];
  }
  model.mean = TensorN(shape, r.doubles(mean_size));
  model.cores.reserve(count);
  for (std::size_t i = 0; i < count; ++i) model.cores.emplace_back(ranks, r.doubles(core_size));
  model.weights.weights = r.doubles(count);
  model.weights.residuals = r.doubles(count);
  model.trace = r.doubles(r.u32());
  return model;
}

}  // namespace corrtensor
