#include "clarifystl/detection/ambiguity_model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>

#include "clarifystl/rng.hpp"

namespace clarifystl::detection {

namespace {

constexpr char kMagic[5] = {'A', 'M', 'B', 'M', '1'};

struct Forward {
  Eigen::VectorXd hpre, h, u, z;
  double unorm = 0.0;
};

Forward forward(const AmbiguityModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Forward f;
  f.hpre = m.W1 * x + m.b1;
  f.h = f.hpre.cwiseMax(0.0);
  f.u = m.W2 * f.h + m.b2;
  f.unorm = std::max(f.u.norm(), 1e-12);
  f.z = f.u / f.unorm;
  return f;
}

void backward(const AmbiguityModel& m, const Eigen::Ref<const Eigen::VectorXd>& x, const Forward& f,
              const Eigen::VectorXd& dz, Gradients& g) {
  const Eigen::VectorXd du = (dz - f.z * f.z.dot(dz)) / f.unorm;
  g.W2.noalias() += du * f.h.transpose();
  g.b2 += du;
  const Eigen::VectorXd dh =
      (m.W2.transpose() * du).cwiseProduct((f.hpre.array() > 0.0).cast<double>().matrix());
  g.W1.noalias() += dh * x.transpose();
  g.b1 += dh;
}

Eigen::Vector2d softmax(const Eigen::Vector2d& logits) {
  const double mx = logits.maxCoeff();
  Eigen::Vector2d e = (logits.array() - mx).exp();
  return e / e.sum();
}

void fill_normal(Eigen::MatrixXd& m, double stddev, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = stddev * rng.normal();
  }
}

template <typename T>
struct AdamState {
  T m, v;
  explicit AdamState(const T& like) : m(T::Zero(like.rows(), like.cols())), v(m) {}

  void step(T& param, const T& grad, double lr, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 4);
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}

std::uint64_t get_bytes(std::istream& in, int n) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), n);
  if (!in) throw DetectionError("truncated model file");
  std::uint64_t v = 0;
  for (int i = n - 1; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes(in, 8)); }

template <typename T>
void put_matrix(std::ostream& out, const T& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

template <typename T>
void get_matrix(std::istream& in, T& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64(in);
  }
}

} // namespace

ModelDims ModelDims::scaled(Eigen::Index input) {
  if (input <= 0) throw DetectionError("input dimension must be positive");
  return {input, std::max<Eigen::Index>(1, input / 4), std::max<Eigen::Index>(1, input / 16)};
}

AmbiguityModel::AmbiguityModel(ModelDims dims, double margin, double threshold)
    : W1(Eigen::MatrixXd::Zero(dims.hidden, dims.input)),
      W2(Eigen::MatrixXd::Zero(dims.output, dims.hidden)),
      W3(Eigen::MatrixXd::Zero(2, dims.output)),
      b1(Eigen::VectorXd::Zero(dims.hidden)),
      b2(Eigen::VectorXd::Zero(dims.output)),
      b3(Eigen::VectorXd::Zero(2)),
      dims_(dims),
      margin_(margin),
      threshold_(threshold) {
  if (dims.input <= 0 || dims.hidden <= 0 || dims.output <= 0) {
    throw DetectionError("model dimensions must be positive");
  }
  if (!(margin > 0.0)) throw DetectionError("margin must be positive");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw DetectionError("threshold must lie in [0, 1]");
}

AmbiguityModel AmbiguityModel::initialized(ModelDims dims, std::uint64_t seed, double margin,
                                           double threshold) {
  AmbiguityModel m(dims, margin, threshold);
  Rng rng(seed);
  fill_normal(m.W1, std::sqrt(2.0 / static_cast<double>(dims.input)), rng);
  fill_normal(m.W2, std::sqrt(1.0 / static_cast<double>(dims.hidden)), rng);
  fill_normal(m.W3, std::sqrt(1.0 / static_cast<double>(dims.output)), rng);
  return m;
}

Eigen::VectorXd AmbiguityModel::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dims_.input) {
    throw DetectionError("embedding has dimension " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(dims_.input));
  }
  return forward(*this, x).z;
}

Eigen::Vector2d AmbiguityModel::probabilities(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return softmax(W3 * project(x) + b3);
}

bool AmbiguityModel::operator==(const AmbiguityModel& o) const {
  return dims_ == o.dims_ && margin_ == o.margin_ && threshold_ == o.threshold_ && W1 == o.W1 &&
         W2 == o.W2 && W3 == o.W3 && b1 == o.b1 && b2 == o.b2 && b3 == o.b3;
}

void AmbiguityModel::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(dims_.input));
  put_u32(out, static_cast<std::uint32_t>(dims_.hidden));
  put_u32(out, static_cast<std::uint32_t>(dims_.output));
  put_f64(out, margin_);
  put_f64(out, threshold_);
  put_matrix(out, W1);
  put_matrix(out, b1);
  put_matrix(out, W2);
  put_matrix(out, b2);
  put_matrix(out, W3);
  put_matrix(out, b3);
  if (!out) throw DetectionError("failed to write model");
}

AmbiguityModel AmbiguityModel::load(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + sizeof magic, kMagic)) {
    throw DetectionError("not an AMBM1 model file");
  }
  ModelDims d;
  d.input = static_cast<Eigen::Index>(get_bytes(in, 4));
  d.hidden = static_cast<Eigen::Index>(get_bytes(in, 4));
  d.output = static_cast<Eigen::Index>(get_bytes(in, 4));
  const double margin = get_f64(in);
  const double threshold = get_f64(in);
  AmbiguityModel m(d, margin, threshold);
  get_matrix(in, m.W1);
  get_matrix(in, m.b1);
  get_matrix(in, m.W2);
  get_matrix(in, m.b2);
  get_matrix(in, m.W3);
  get_matrix(in, m.b3);
  return m;
}

void AmbiguityModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DetectionError("cannot write " + path.string());
  save(out);
}

AmbiguityModel AmbiguityModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DetectionError("cannot open model " + path.string());
  return load(in);
}

Gradients::Gradients(const ModelDims& d)
    : W1(Eigen::MatrixXd::Zero(d.hidden, d.input)),
      W2(Eigen::MatrixXd::Zero(d.output, d.hidden)),
      W3(Eigen::MatrixXd::Zero(2, d.output)),
      b1(Eigen::VectorXd::Zero(d.hidden)),
      b2(Eigen::VectorXd::Zero(d.output)),
      b3(Eigen::VectorXd::Zero(2)) {}

void Gradients::set_zero() {
  W1.setZero();
  W2.setZero();
  W3.setZero();
  b1.setZero();
  b2.setZero();
  b3.setZero();
}

ExampleLoss example_loss(const AmbiguityModel& model,
                         const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& p,
                         const Eigen::Ref<const Eigen::VectorXd>& n,
                         int label,
                         Gradients* grads) {
  if (label != 0 && label != 1) throw DetectionError("labels must be 0 or 1");
  const Forward fa = forward(model, a);
  const Forward fp = forward(model, p);
  const Forward fn = forward(model, n);

  ExampleLoss loss;
  loss.triplet = triplet_loss(fa.z, fp.z, fn.z, model.margin());
  const Eigen::Vector2d probs = softmax(model.W3 * fa.z + model.b3);
  loss.cross_entropy = -std::log(std::max(probs(label), 1e-300));
  if (grads == nullptr) return loss;

  Eigen::VectorXd dza = Eigen::VectorXd::Zero(fa.z.size());
  Eigen::VectorXd dzp = Eigen::VectorXd::Zero(fa.z.size());
  Eigen::VectorXd dzn = Eigen::VectorXd::Zero(fa.z.size());
  if (loss.triplet > 0.0) {
    const Eigen::VectorXd ap = fa.z - fp.z;
    const Eigen::VectorXd an = fa.z - fn.z;
    const double dap = ap.norm();
    const double dan = an.norm();
    if (dap > 1e-12) {
      dza += ap / dap;
      dzp -= ap / dap;
    }
    if (dan > 1e-12) {
      dza -= an / dan;
      dzn += an / dan;
    }
  }
  Eigen::Vector2d dlogits = probs;
  dlogits(label) -= 1.0;
  grads->W3.noalias() += dlogits * fa.z.transpose();
  grads->b3 += dlogits;
  dza += model.W3.transpose() * dlogits;

  backward(model, a, fa, dza, *grads);
  if (loss.triplet > 0.0) {
    backward(model, p, fp, dzp, *grads);
    backward(model, n, fn, dzn, *grads);
  }
  return loss;
}

TrainingResult train_ambiguity_model(const Eigen::MatrixXd& embeddings,
                                     const std::vector<int>& labels,
                                     const TrainingConfig& config) {
  if (static_cast<std::size_t>(embeddings.cols()) != labels.size()) {
    throw DetectionError("one label per embedding required");
  }
  std::vector<std::size_t> pool[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DetectionError("labels must be 0 or 1");
    pool[labels[i]].push_back(i);
  }
  if (pool[0].empty() || pool[1].empty()) {
    throw DetectionError("training data must contain both classes");
  }
  if (config.epochs < 0 || config.batch <= 0) throw DetectionError("bad epoch or batch setting");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) {
    throw DetectionError("dropout must lie in [0, 1)");
  }
  ModelDims dims = config.dims;
  if (dims.input == 0) {
    dims = ModelDims::scaled(embeddings.rows());
    if (config.dims.hidden > 0) dims.hidden = config.dims.hidden;
    if (config.dims.output > 0) dims.output = config.dims.output;
  } else if (dims.input != embeddings.rows()) {
    throw DetectionError("embedding dimension " + std::to_string(embeddings.rows()) +
                         " does not match configured input dimension " + std::to_string(dims.input));
  }

  Rng rng(config.seed);
  TrainingResult result{AmbiguityModel::initialized(dims, rng.next(), config.margin), {}};
  AmbiguityModel& model = result.model;
  if (config.epochs == 0) return result;

  const double keep = 1.0 - config.dropout;
  auto dropout = [&](Eigen::Index col) {
    Eigen::VectorXd v = embeddings.col(col);
    if (config.dropout == 0.0) return v;
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.coin(keep) ? v(k) / keep : 0.0;
    return v;
  };
  struct Triplet {
    Eigen::VectorXd a, p, n;
  };
  auto sample = [&](std::size_t i) {
    const auto& other = pool[1 - labels[i]];
    const auto col = static_cast<Eigen::Index>(i);
    Triplet t;
    t.a = dropout(col);
    t.p = dropout(col);
    t.n = dropout(static_cast<Eigen::Index>(other[rng.index(other.size())]));
    return t;
  };

  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  double initial = 0.0;
  for (std::size_t i : order) {
    Triplet t = sample(i);
    initial += example_loss(model, t.a, t.p, t.n, labels[i], nullptr).triplet;
  }
  result.log.initial_triplet = initial / static_cast<double>(order.size());

  Gradients g(dims);
  AdamState<Eigen::MatrixXd> sW1(model.W1), sW2(model.W2), sW3(model.W3);
  AdamState<Eigen::VectorXd> sb1(model.b1), sb2(model.b2), sb3(model.b3);
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    EpochLoss acc;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      g.set_zero();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        Triplet t = sample(i);
        const ExampleLoss l = example_loss(model, t.a, t.p, t.n, labels[i], &g);
        acc.triplet += l.triplet;
        acc.cross_entropy += l.cross_entropy;
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      ++step;
      sW1.step(model.W1, g.W1 * scale, config.lr, step);
      sb1.step(model.b1, g.b1 * scale, config.lr, step);
      sW2.step(model.W2, g.W2 * scale, config.lr, step);
      sb2.step(model.b2, g.b2 * scale, config.lr, step);
      sW3.step(model.W3, g.W3 * scale, config.lr, step);
      sb3.step(model.b3, g.b3 * scale, config.lr, step);
    }
    const double n = static_cast<double>(order.size());
    acc.triplet /= n;
    acc.cross_entropy /= n;
    acc.total = acc.triplet + acc.cross_entropy;
    result.log.epochs.push_back(acc);
  }
  return result;
}

TrainingResult train_ambiguity_model(const std::vector<std::pair<std::string, int>>& records,
                                     const llm::EmbeddingProvider& provider,
                                     const TrainingConfig& config) {
  if (records.empty()) throw DetectionError("no training records");
  if (config.dims.input != 0 && config.dims.input != provider.dimension()) {
    throw DetectionError("provider dimension " + std::to_string(provider.dimension()) +
                         " does not match configured input dimension " +
                         std::to_string(config.dims.input));
  }
  std::vector<std::string> texts;
  std::vector<int> labels;
  for (const auto& [text, label] : records) {
    texts.push_back(text);
    labels.push_back(label);
  }
  const auto batch = llm::embed(texts, provider);
  Eigen::MatrixXd x(provider.dimension(), static_cast<Eigen::Index>(texts.size()));
  for (std::size_t i = 0; i < texts.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = batch.vectors[i];
  return train_ambiguity_model(x, labels, config);
}

DetectionResult classify_embedding(const AmbiguityModel& model,
                                   const Eigen::Ref<const Eigen::VectorXd>& embedding) {
  DetectionResult r;
  r.confidence = model.p_ambiguous(embedding);
  r.is_defective = r.confidence >= model.threshold();
  if (r.is_defective) r.types = {DefectType::Semantic};
  return r;
}

DetectionResult classify_ambiguity(const AmbiguityModel& model,
                                   const std::string& text,
                                   const llm::EmbeddingProvider& provider) {
  return classify_embedding(model, provider.embed(text));
}

} // namespace clarifystl::detection
