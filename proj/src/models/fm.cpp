#include "recbench/models/fm.hpp"

#include "recbench/error.hpp"
#include "recbench/models/losses.hpp"

namespace recbench {
namespace {

constexpr double kInitStd = 0.01;

// Appends the side-table features of one table to per-entity entry lists.
void add_table(const Dataset& ds, const FeatureTable& table, const std::string& id_field,
               std::vector<std::vector<FeatureEntry>>& rows, std::size_t& next) {
  const auto& ids = table.ids(id_field);
  // First row per entity wins.
  std::vector<std::size_t> row_of(rows.size(), table.rows);
  for (std::size_t r = 0; r < table.rows; ++r) {
    const auto e = static_cast<std::size_t>(ids[r]);
    if (e != 0 && e < rows.size() && row_of[e] == table.rows) row_of[e] = r;
  }
  for (std::size_t k = 0; k < table.schema.size(); ++k) {
    const auto& spec = table.schema[k];
    if (spec.name == id_field || spec.type == FieldType::float_seq) continue;
    const std::size_t base = next;
    std::size_t width = 1;
    if (spec.type == FieldType::token || spec.type == FieldType::token_seq) {
      width = ds.vocabulary(table.vocab[k]).size();
    }
    for (std::size_t e = 1; e < rows.size(); ++e) {
      const auto r = row_of[e];
      if (r == table.rows) continue;
      std::visit(
          [&](const auto& col) {
            using C = std::decay_t<decltype(col)>;
            if constexpr (std::is_same_v<C, IdColumn>) {
              if (col[r] != kPaddingId) rows[e].push_back({base + static_cast<std::size_t>(col[r]), 1.0});
            } else if constexpr (std::is_same_v<C, IdSeqColumn>) {
              const auto& seq = col[r];
              for (auto t : seq) {
                rows[e].push_back({base + static_cast<std::size_t>(t),
                                   1.0 / static_cast<double>(seq.size())});
              }
            } else if constexpr (std::is_same_v<C, FloatColumn>) {
              if (col[r]) rows[e].push_back({base, *col[r]});
            }
          },
          table.columns[k]);
    }
    next += width;
  }
}

FeatureRows to_rows(const std::vector<std::vector<FeatureEntry>>& lists) {
  FeatureRows out;
  for (const auto& list : lists) {
    out.entries.insert(out.entries.end(), list.begin(), list.end());
    out.offsets.push_back(out.entries.size());
  }
  return out;
}

void store_rows(ModelState& s, const std::string& prefix, const FeatureRows& rows) {
  auto& off = s.arrays[prefix + "_feature_offsets"];
  auto& idx = s.arrays[prefix + "_feature_index"];
  auto& val = s.arrays[prefix + "_feature_value"];
  off.assign(rows.offsets.begin(), rows.offsets.end());
  for (const auto& e : rows.entries) {
    idx.push_back(static_cast<double>(e.index));
    val.push_back(e.value);
  }
}

FeatureRows load_rows(const ModelState& s, const std::string& prefix, std::size_t n_features) {
  FeatureRows rows;
  rows.offsets.clear();
  for (double v : s.array(prefix + "_feature_offsets")) {
    rows.offsets.push_back(static_cast<std::size_t>(v));
  }
  const auto& idx = s.array(prefix + "_feature_index");
  const auto& val = s.array(prefix + "_feature_value");
  if (rows.offsets.empty() || idx.size() != val.size() || rows.offsets.back() != idx.size()) {
    throw CheckpointError("inconsistent " + prefix + " feature arrays");
  }
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto index = static_cast<std::size_t>(idx[k]);
    if (index >= n_features) throw CheckpointError("feature index out of range");
    rows.entries.push_back({index, val[k]});
  }
  return rows;
}

}  // namespace

FmFeatureSpace FmFeatureSpace::from_dataset(const Dataset& ds) {
  const auto nu = static_cast<std::size_t>(ds.n_users());
  const auto ni = static_cast<std::size_t>(ds.n_items());
  std::vector<std::vector<FeatureEntry>> users(nu);
  std::vector<std::vector<FeatureEntry>> items(ni);
  for (std::size_t u = 1; u < nu; ++u) users[u].push_back({u, 1.0});
  for (std::size_t i = 1; i < ni; ++i) items[i].push_back({nu + i, 1.0});
  std::size_t next = nu + ni;
  if (ds.user_features() && ds.user_features()->has_field(ds.fields().user_id)) {
    add_table(ds, *ds.user_features(), ds.fields().user_id, users, next);
  }
  if (ds.item_features() && ds.item_features()->has_field(ds.fields().item_id)) {
    add_table(ds, *ds.item_features(), ds.fields().item_id, items, next);
  }
  FmFeatureSpace space;
  space.n_features = next;
  space.users = to_rows(users);
  space.items = to_rows(items);
  return space;
}

double fm_logit(std::span<const FeatureEntry> x, double bias, std::span<const double> linear,
                std::span<const double> factors, std::size_t dim) {
  double y = bias;
  for (const auto& e : x) y += linear[e.index] * e.value;
  for (std::size_t f = 0; f < dim; ++f) {
    double sum = 0.0;
    double squares = 0.0;
    for (const auto& e : x) {
      const double t = factors[e.index * dim + f] * e.value;
      sum += t;
      squares += t * t;
    }
    y += 0.5 * (sum * sum - squares);
  }
  return y;
}

FmModel::FmModel(FmFeatureSpace features, Id n_users, Id n_items, std::size_t dim, double l2)
    : features_(std::move(features)),
      n_users_(n_users),
      n_items_(n_items),
      dim_(dim),
      l2_(l2),
      linear_(features_.n_features, 0.0),
      factors_(features_.n_features * dim, 0.0) {
  if (features_.users.size() != static_cast<std::size_t>(n_users) ||
      features_.items.size() != static_cast<std::size_t>(n_items)) {
    throw DataError("feature rows do not match the user and item counts");
  }
}

FmModel::FmModel(FmFeatureSpace features, Id n_users, Id n_items, const TrainConfig& config,
                 Rng& init)
    : FmModel(std::move(features), n_users, n_items, config.embedding_dim, config.l2) {
  config.validate();
  for (auto& v : factors_) v = kInitStd * standard_normal(init);
}

FmModel FmModel::from_state(const ModelState& state) {
  FmFeatureSpace space;
  space.n_features = static_cast<std::size_t>(state.hyper("n_features"));
  space.users = load_rows(state, "user", space.n_features);
  space.items = load_rows(state, "item", space.n_features);
  FmModel m(std::move(space), static_cast<Id>(state.hyper("n_users")),
            static_cast<Id>(state.hyper("n_items")),
            static_cast<std::size_t>(state.hyper("embedding_dim")), state.hyper("l2"));
  const auto& b = state.array("bias");
  const auto& w = state.array("linear");
  const auto& v = state.array("factors");
  if (b.size() != 1 || w.size() != m.linear_.size() || v.size() != m.factors_.size()) {
    throw CheckpointError("fm parameter arrays have the wrong size");
  }
  m.bias_ = b[0];
  m.linear_ = w;
  m.factors_ = v;
  return m;
}

std::vector<FeatureEntry> FmModel::entries(Id user, Id item) const {
  check_user(user);
  check_item(item);
  const auto u = features_.users.row(static_cast<std::size_t>(user));
  const auto i = features_.items.row(static_cast<std::size_t>(item));
  std::vector<FeatureEntry> x(u.begin(), u.end());
  x.insert(x.end(), i.begin(), i.end());
  return x;
}

double FmModel::logit(Id user, Id item) const {
  return fm_logit(entries(user, item), bias_, linear_, factors_, dim_);
}

FmModel::Partial FmModel::partial(std::span<const FeatureEntry> x) const {
  Partial p;
  p.sum.assign(dim_, 0.0);
  for (const auto& e : x) {
    p.linear += linear_[e.index] * e.value;
    const double* v = factors_.data() + e.index * dim_;
    for (std::size_t f = 0; f < dim_; ++f) {
      const double t = v[f] * e.value;
      p.sum[f] += t;
      p.squares += t * t;
    }
  }
  return p;
}

double FmModel::combine(const Partial& u, const Partial& i) const {
  double pair = 0.0;
  for (std::size_t f = 0; f < dim_; ++f) {
    const double s = u.sum[f] + i.sum[f];
    pair += s * s;
  }
  return bias_ + u.linear + i.linear + 0.5 * (pair - u.squares - i.squares);
}

double FmModel::loss_and_gradient(const Batch& batch, Gradient* grad) const {
  const auto users = batch.ids(kUserColumn);
  const auto items = batch.ids(kItemColumn);
  const auto labels = batch.floats(kLabelColumn);
  if (users.empty()) throw DataError("empty training batch");
  const double n = static_cast<double>(users.size());
  GradientRows* gb = nullptr;
  GradientRows* gw = nullptr;
  GradientRows* gv = nullptr;
  if (grad != nullptr) {
    gb = &(*grad)["bias"];
    gw = &(*grad)["linear"];
    gv = &(*grad)["factors"];
    gv->width = dim_;
  }
  double total = 0.0;
  std::vector<double> sum(dim_);
  for (std::size_t r = 0; r < users.size(); ++r) {
    const auto x = entries(users[r], items[r]);
    const double y = fm_logit(x, bias_, linear_, factors_, dim_);
    total += logistic_loss(y, labels[r]);
    for (const auto& e : x) {
      total += 0.5 * l2_ * linear_[e.index] * linear_[e.index];
      for (std::size_t f = 0; f < dim_; ++f) {
        const double v = factors_[e.index * dim_ + f];
        total += 0.5 * l2_ * v * v;
      }
    }
    if (grad == nullptr) continue;
    const double g = sigmoid(y) - labels[r];
    gb->at(0, 0) += g / n;
    std::fill(sum.begin(), sum.end(), 0.0);
    for (const auto& e : x) {
      for (std::size_t f = 0; f < dim_; ++f) sum[f] += factors_[e.index * dim_ + f] * e.value;
    }
    for (const auto& e : x) {
      gw->at(e.index, 0) += (g * e.value + l2_ * linear_[e.index]) / n;
      for (std::size_t f = 0; f < dim_; ++f) {
        const double v = factors_[e.index * dim_ + f];
        gv->at(e.index, f) += (g * e.value * (sum[f] - v * e.value) + l2_ * v) / n;
      }
    }
  }
  return total / n;
}

void FmModel::apply_gradient(const Gradient& grad, double learning_rate) {
  if (const auto it = grad.find("bias"); it != grad.end()) {
    for (const auto& [row, values] : it->second.rows) bias_ -= learning_rate * values[0];
  }
  if (const auto it = grad.find("linear"); it != grad.end()) {
    for (const auto& [row, values] : it->second.rows) linear_[row] -= learning_rate * values[0];
  }
  if (const auto it = grad.find("factors"); it != grad.end()) {
    for (const auto& [row, values] : it->second.rows) {
      for (std::size_t f = 0; f < dim_; ++f) factors_[row * dim_ + f] -= learning_rate * values[f];
    }
  }
}

std::vector<double> FmModel::full_sort_predict(std::span<const Id> users) const {
  const auto n = static_cast<std::size_t>(n_items_);
  std::vector<Partial> item_parts;
  item_parts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) item_parts.push_back(partial(features_.items.row(i)));
  std::vector<double> out(users.size() * n);
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    const auto up = partial(features_.users.row(static_cast<std::size_t>(users[r])));
    for (std::size_t i = 0; i < n; ++i) out[r * n + i] = sigmoid(combine(up, item_parts[i]));
  }
  return out;
}

std::vector<double> FmModel::score_pairs(std::span<const Id> users,
                                         std::span<const Id> items) const {
  if (users.size() != items.size()) throw DataError("user and item columns differ in length");
  std::vector<double> out(users.size());
  for (std::size_t r = 0; r < users.size(); ++r) {
    check_user(users[r]);
    check_item(items[r]);
    const auto up = partial(features_.users.row(static_cast<std::size_t>(users[r])));
    const auto ip = partial(features_.items.row(static_cast<std::size_t>(items[r])));
    out[r] = sigmoid(combine(up, ip));
  }
  return out;
}

ModelState FmModel::state() const {
  ModelState s;
  s.kind = std::string(kind());
  s.hyperparameters["n_users"] = static_cast<double>(n_users_);
  s.hyperparameters["n_items"] = static_cast<double>(n_items_);
  s.hyperparameters["n_features"] = static_cast<double>(features_.n_features);
  s.hyperparameters["embedding_dim"] = static_cast<double>(dim_);
  s.hyperparameters["l2"] = l2_;
  store_rows(s, "user", features_.users);
  store_rows(s, "item", features_.items);
  s.arrays["bias"] = {bias_};
  s.arrays["linear"] = linear_;
  s.arrays["factors"] = factors_;
  return s;
}

}  // namespace recbench
