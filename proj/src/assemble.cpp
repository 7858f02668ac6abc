#include <fstream>

#include "gtab/assemble.hpp"
#include "gtab/csv.hpp"
#include "gtab/error.hpp"

namespace gtab {

std::string_view to_string(Block b) {
  switch (b) {
    case Block::orig: return "orig";
    case Block::nfa: return "nfa";
    case Block::sf: return "sf";
    case Block::pearl: return "pearl";
  }
  return "?";
}

Block parse_block(std::string_view s) {
  for (Block b : {Block::orig, Block::nfa, Block::sf, Block::pearl}) {
    if (to_string(b) == s) return b;
  }
  throw InputError("unknown block '" + std::string(s) + "'");
}

std::size_t AugmentedTable::width(Block b) const {
  std::size_t w = 0;
  for (const auto& c : columns) w += c.block == b;
  return w;
}

Matrix encode_original(const FeatureTable& features, std::vector<std::string>* names) {
  Eigen::Index width = 0;
  for (const auto& c : features.columns()) {
    width += c.kind == FeatureKind::numerical ? 1 : static_cast<Eigen::Index>(c.vocabulary.size());
  }
  const auto n = static_cast<Eigen::Index>(features.n_rows());
  Matrix out(n, width);
  Eigen::Index at = 0;
  for (const auto& c : features.columns()) {
    if (c.kind == FeatureKind::numerical) {
      for (Eigen::Index i = 0; i < n; ++i) out(i, at) = c.values[static_cast<std::size_t>(i)];
      if (names) names->push_back(c.name);
      ++at;
      continue;
    }
    const auto v = static_cast<Eigen::Index>(c.vocabulary.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto code = c.codes[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < v; ++k) {
        out(i, at + k) = code == kMissingCode ? kMissing : (code == k ? 1.0 : 0.0);
      }
    }
    if (names) {
      for (const auto& cat : c.vocabulary) names->push_back(c.name + "=" + cat);
    }
    at += v;
  }
  return out;
}

namespace {

struct BlockPart {
  Block block;
  Matrix values;
  std::vector<std::string> names;
};

void maybe_reduce(BlockPart& part, const Split& split, const AssembleOptions& opts,
                  std::vector<PcaModel>& models) {
  const auto width = static_cast<std::size_t>(part.values.cols());
  if (width <= opts.pca_threshold) return;
  Matrix train(static_cast<Eigen::Index>(split.train.size()), part.values.cols());
  for (std::size_t t = 0; t < split.train.size(); ++t) {
    train.row(static_cast<Eigen::Index>(t)) = part.values.row(split.train[t]);
  }
  const std::size_t keep = std::min({opts.pca_dims, split.train.size(), width});
  PcaModel model = pca_fit(train, keep, std::string(to_string(part.block)));
  part.values = pca_transform(model, part.values);
  part.names.clear();
  for (std::size_t c = 0; c < keep; ++c) part.names.push_back("pc_" + std::to_string(c + 1));
  models.push_back(std::move(model));
}

}  // namespace

AugmentedTable assemble_features(const Dataset& ds, const NfaTable* nfa,
                                 const StructuralFeatures* sf, const Matrix* pearl,
                                 const Split& split, const AssembleOptions& opts) {
  const auto n = static_cast<Eigen::Index>(ds.n_nodes());
  split.validate(ds.n_nodes());
  std::vector<BlockPart> parts;

  BlockPart orig{Block::orig, {}, {}};
  orig.values = encode_original(ds.features, &orig.names);
  parts.push_back(std::move(orig));

  if (opts.use_nfa) {
    if (!nfa) throw InputError("assemble: NFA block enabled but not provided");
    BlockPart p{Block::nfa, nfa->values, {}};
    for (const auto& info : nfa->provenance) p.names.push_back(info.name());
    parts.push_back(std::move(p));
  }
  if (opts.use_sf) {
    if (!sf) throw InputError("assemble: structural block enabled but not provided");
    parts.push_back({Block::sf, sf->as_matrix(), sf->column_names()});
  }
  if (opts.use_pearl) {
    if (!pearl) throw InputError("assemble: PEARL block enabled but not provided");
    BlockPart p{Block::pearl, *pearl, {}};
    for (Eigen::Index k = 0; k < pearl->cols(); ++k) p.names.push_back("pearl_" + std::to_string(k + 1));
    parts.push_back(std::move(p));
  }

  AugmentedTable table;
  Eigen::Index width = 0;
  for (BlockPart& p : parts) {
    if (p.values.rows() != n) {
      throw InputError("assemble: block '" + std::string(to_string(p.block)) + "' has " +
                       std::to_string(p.values.rows()) + " rows, expected " + std::to_string(n));
    }
    if (p.block == Block::orig || p.block == Block::nfa) maybe_reduce(p, split, opts, table.pca);
    width += p.values.cols();
  }
  table.values.resize(n, width);
  Eigen::Index at = 0;
  for (BlockPart& p : parts) {
    table.values.middleCols(at, p.values.cols()) = p.values;
    at += p.values.cols();
    for (auto& name : p.names) table.columns.push_back({p.block, std::move(name)});
  }
  return table;
}

void write_augmented(const AugmentedTable& t, const std::filesystem::path& csv_path,
                     const std::filesystem::path& sidecar_path,
                     const nlohmann::ordered_json& provenance) {
  {
    std::ofstream out(csv_path);
    if (!out) throw InputError(csv_path.string() + ": cannot write");
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      if (j) out << ',';
      out << csv::quote(std::string(to_string(t.columns[j].block)) + "." + t.columns[j].name);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.values.cols(); ++j) {
        if (j) out << ',';
        out << csv::format_double(t.values(i, j));
      }
      out << '\n';
    }
  }
  nlohmann::ordered_json side;
  side["n_rows"] = t.values.rows();
  side["blocks"] = nlohmann::ordered_json::array();
  for (Block b : {Block::orig, Block::nfa, Block::sf, Block::pearl}) {
    const std::size_t w = t.width(b);
    if (w == 0) continue;
    bool reduced = false;
    for (const auto& m : t.pca) reduced |= m.block == to_string(b);
    side["blocks"].push_back({{"name", to_string(b)}, {"width", w}, {"pca", reduced}});
  }
  side["pca"] = nlohmann::ordered_json::array();
  for (const auto& m : t.pca) {
    nlohmann::ordered_json jm;
    jm["block"] = m.block;
    jm["d_in"] = m.d_in();
    jm["d_keep"] = m.d_keep();
    jm["mean"] = std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size());
    jm["explained_variance"] = std::vector<double>(m.explained_variance.data(),
                                                   m.explained_variance.data() + m.explained_variance.size());
    auto comps = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.components.rows(); ++r) {
      comps.push_back(std::vector<double>(m.components.row(r).data(),
                                          m.components.row(r).data() + m.components.cols()));
    }
    jm["components"] = std::move(comps);
    side["pca"].push_back(std::move(jm));
  }
  side["provenance"] = provenance;
  std::ofstream out(sidecar_path);
  if (!out) throw InputError(sidecar_path.string() + ": cannot write");
  out << side.dump(2) << '\n';
}

AugmentedTable read_augmented(const std::filesystem::path& csv_path) {
  csv::Table raw = csv::read(csv_path, true);
  AugmentedTable t;
  for (const auto& h : raw.header) {
    const auto dot = h.find('.');
    if (dot == std::string::npos) throw InputError(csv_path.string() + ": bad column '" + h + "'");
    t.columns.push_back({parse_block(h.substr(0, dot)), h.substr(dot + 1)});
  }
  t.values.resize(static_cast<Eigen::Index>(raw.rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    if (raw.rows[i].size() != t.columns.size()) {
      throw InputError(csv_path.string() + ":" + std::to_string(raw.line_numbers[i]) +
                       ": wrong field count");
    }
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      double v;
      if (!csv::parse_double(raw.rows[i][j], v)) {
        throw InputError(csv_path.string() + ":" + std::to_string(raw.line_numbers[i]) +
                         ": non-numeric value");
      }
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return t;
}

}  // namespace gtab
