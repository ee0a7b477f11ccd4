//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/data/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "drp/common/csv.h"
#include "drp/common/error.h"
#include "drp/common/rng.h"

namespace drp::data {
namespace {

constexpr int kFactorRank = 3;

// Scaffolds carry one substitution site marked {R}.
const std::vector<std::string> &Scaffolds() {
  static const std::vector<std::string> kScaffolds = {
      "COc1cc2ncnc(Nc3cccc({R})c3)c2cc1OC",
      "O=C(Nc1ccccc1)Nc1ccc({R})cc1",
      "O=c1ccc2ccc({R})cc2o1",
      "Nc1nc({R})nc2c1ncn2C1CC(O)C(CO)O1",
      "NCCc1c[nH]c2ccc({R})cc12",
      "CN1CCN(CC1)c1ccc({R})cc1",
      "CC(C)CC(NC(=O)C(CC(C)C)NC(=O)OCc1ccc({R})cc1)C=O",
      "NS(=O)(=O)c1ccc(cc1)C(=O)Nc1cc({R})ccc1",
  };
  return kScaffolds;
}

const std::vector<std::string> &Substituents() {
  static const std::vector<std::string> kSubstituents = {
      "C", "CC", "F", "Cl", "Br", "O", "N", "OC", "C(F)(F)F", "C#N",
  };
  return kSubstituents;
}

std::string Substitute(const std::string &scaffold, const std::string &group) {
  std::string out = scaffold;
  const auto pos = out.find("{R}");
  out.replace(pos, 3, group);
  return out;
}

struct RowStats {
  double mean = 0.0;
  double sd = 0.0;
};

RowStats Stats(const std::vector<double> &v) {
  RowStats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(s.sd / static_cast<double>(v.size()));
  return s;
}

bool Passes(const RowStats &s) { return s.mean >= 1.0 && s.sd >= 0.5; }

std::string Name(const char *prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04d", prefix, i);
  return buf;
}

// Archetype on/off gene with an optional dependence on the smooth line factor.
std::vector<double> InformativeGene(Rng &rng, const std::vector<int> &archetype,
                                    const std::vector<double> &smooth, int n_archetypes) {
  while (true) {
    std::vector<int> order(n_archetypes);
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order.begin(), order.end());
    // On in 2..6 archetypes, never in all of them.
    const int k = std::min(n_archetypes - 1, 2 + static_cast<int>(rng.Index(5)));
    std::vector<bool> on(n_archetypes, false);
    for (int i = 0; i < k; ++i) on[order[i]] = true;
    const double level = rng.Uniform(4.0, 8.0);
    const double slope = rng.Uniform() < 0.3 ? rng.Normal(0.0, 0.6) : 0.0;
    std::vector<double> v(archetype.size());
    for (std::size_t l = 0; l < v.size(); ++l) {
      double x;
      if (on[archetype[l]]) {
        x = level + rng.Normal(0.0, 0.25) + slope * smooth[l];
      } else {
        x = rng.Uniform() < 0.8 ? 0.0 : rng.Uniform(0.0, 0.3);
      }
      v[l] = std::max(0.0, x);
    }
    if (Passes(Stats(v))) return v;
  }
}

}  // namespace

const std::vector<std::string> &SyntheticTissues() {
  static const std::vector<std::string> kTissues = {
      "BREAST", "LUNG", "SKIN", "LARGE_INTESTINE", "OVARY", "PANCREAS",
      "CENTRAL_NERVOUS_SYSTEM", "HAEMATOPOIETIC_AND_LYMPHOID_TISSUE",
  };
  return kTissues;
}

double PlantedFunction::Evaluate(int line, int archetype, int drug, int family) const {
  double bilinear = 0.0;
  for (int r = 0; r < kFactorRank; ++r) {
    bilinear += archetype_factor[archetype][r] * family_factor[family][r];
  }
  return intercept + family_base[family] + drug_offset[drug] + bilinear +
         smooth_weight * line_smooth[line] * family_smooth[family];
}

SyntheticData Synthesize(const SynthConfig &config) {
  if (config.n_lines < 2 || config.n_genes < 2 || config.n_drugs < 2) {
    throw DomainError("synthesize: sizes must be at least 2");
  }
  const int n_arch = config.n_archetypes;
  const int n_fam = config.n_families;
  if (n_arch < 2 || n_arch > static_cast<int>(SyntheticTissues().size())) {
    throw DomainError("synthesize: archetype count must lie in [2, 8]");
  }
  if (n_fam < 1 || n_fam > static_cast<int>(Scaffolds().size())) {
    throw DomainError("synthesize: family count must lie in [1, 8]");
  }
  if (config.n_drugs > n_fam * static_cast<int>(Substituents().size())) {
    throw DomainError("synthesize: too many drugs for the scaffold library");
  }

  Rng root(config.seed);
  Rng line_rng = root.Split();
  Rng gene_rng = root.Split();
  Rng drug_rng = root.Split();
  Rng effect_rng = root.Split();
  Rng response_rng = root.Split();

  SyntheticData data;
  data.config = config;

  // Cell lines.
  const int n_lines = config.n_lines;
  data.line_archetype.resize(n_lines);
  auto &truth = data.truth;
  truth.line_smooth.resize(n_lines);
  ExpressionMatrix &m = data.expression;
  for (int l = 0; l < n_lines; ++l) {
    const int a = l % n_arch;
    data.line_archetype[l] = a;
    truth.line_smooth[l] = line_rng.Normal();
    char buf[16];
    std::snprintf(buf, sizeof(buf), "SYN%03d_", l + 1);
    m.cell_lines.push_back(buf + SyntheticTissues()[a]);
    m.tissues.push_back(TissueFromCellLine(m.cell_lines.back()));
  }

  // Genes. Rows are generated per category, then interleaved.
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (int g = 0; g < config.n_genes; ++g) {
    rows.emplace_back(Name("ONC", g + 1),
                      InformativeGene(gene_rng, data.line_archetype, truth.line_smooth, n_arch));
    data.cgc.insert(rows.back().first);
  }
  for (int g = 0; g < config.n_cgc_low_mean; ++g) {
    std::vector<double> v(n_lines);
    do {
      for (double &x : v) x = gene_rng.Uniform(0.0, 1.4);
    } while (Stats(v).mean >= 1.0);
    rows.emplace_back(Name("LOWM", g + 1), v);
    data.cgc.insert(rows.back().first);
  }
  for (int g = 0; g < config.n_cgc_low_std; ++g) {
    std::vector<double> v(n_lines);
    const double level = gene_rng.Uniform(2.0, 7.0);
    do {
      for (double &x : v) x = std::max(0.0, level + gene_rng.Normal(0.0, 0.25));
    } while (Stats(v).sd >= 0.5);
    rows.emplace_back(Name("FLAT", g + 1), v);
    data.cgc.insert(rows.back().first);
  }
  for (int g = 0; g < config.n_noise_genes; ++g) {
    std::vector<double> v(n_lines);
    const double level = gene_rng.Uniform(3.0, 8.0);
    const double spread = gene_rng.Uniform(1.0, 2.5);
    do {
      for (double &x : v) x = std::max(0.0, gene_rng.Normal(level, spread));
    } while (!Passes(Stats(v)));
    rows.emplace_back(Name("NOIS", g + 1), v);
  }
  for (int g = 0; g < config.n_noise_low; ++g) {
    std::vector<double> v(n_lines);
    do {
      for (double &x : v) x = gene_rng.Uniform() < 0.5 ? 0.0 : gene_rng.Uniform(0.0, 1.5);
    } while (Stats(v).mean >= 1.0);
    rows.emplace_back(Name("BKGD", g + 1), v);
  }
  gene_rng.Shuffle(rows.begin(), rows.end());
  m.values.resize(static_cast<Eigen::Index>(rows.size()), n_lines);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    m.genes.push_back(rows[r].first);
    for (int l = 0; l < n_lines; ++l) {
      m.values(static_cast<Eigen::Index>(r), l) = rows[r].second[l];
    }
  }

  // Drugs: family f = d mod n_families, substituents drawn without
  // replacement inside each family.
  std::vector<std::vector<int>> family_subs(n_fam);
  for (auto &subs : family_subs) {
    subs.resize(Substituents().size());
    std::iota(subs.begin(), subs.end(), 0);
    drug_rng.Shuffle(subs.begin(), subs.end());
  }
  std::vector<double> sub_effect(Substituents().size());
  for (double &e : sub_effect) e = effect_rng.Normal(0.0, 0.6);
  std::vector<int> drug_sub(config.n_drugs);
  for (int d = 0; d < config.n_drugs; ++d) {
    const int f = d % n_fam;
    const int s = family_subs[f][d / n_fam];
    char id[16];
    std::snprintf(id, sizeof(id), "DRUG%02d", d + 1);
    data.drugs.push_back({id, Substitute(Scaffolds()[f], Substituents()[s])});
    data.drug_family.push_back(f);
    data.drug_substituent.push_back(Substituents()[s]);
    drug_sub[d] = s;
  }

  // Planted response.
  truth.intercept = 1.5;
  truth.smooth_weight = 0.5;
  truth.archetype_factor.assign(n_arch, std::vector<double>(kFactorRank));
  truth.family_factor.assign(n_fam, std::vector<double>(kFactorRank));
  for (auto &row : truth.archetype_factor) {
    for (double &x : row) x = effect_rng.Normal();
  }
  for (auto &row : truth.family_factor) {
    for (double &x : row) x = effect_rng.Normal();
  }
  truth.family_base.resize(n_fam);
  truth.family_smooth.resize(n_fam);
  for (int f = 0; f < n_fam; ++f) {
    truth.family_base[f] = effect_rng.Normal(0.0, 0.8);
    truth.family_smooth[f] = effect_rng.Normal();
  }
  truth.drug_offset.resize(config.n_drugs);
  for (int d = 0; d < config.n_drugs; ++d) {
    truth.drug_offset[d] = sub_effect[drug_sub[d]] + effect_rng.Normal(0.0, 0.2);
  }

  std::vector<std::pair<int, int>> pairs;
  for (int d = 0; d < config.n_drugs; ++d) {
    for (int l = 0; l < n_lines; ++l) pairs.emplace_back(l, d);
  }
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  response_rng.Shuffle(order.begin(), order.end());
  const auto n_drop = static_cast<std::size_t>(
      std::llround(config.drop_fraction * static_cast<double>(pairs.size())));
  std::vector<bool> keep(pairs.size(), true);
  for (std::size_t i = 0; i < std::min(n_drop, pairs.size() - 1); ++i) keep[order[i]] = false;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double noise = response_rng.Normal(0.0, config.noise_sd);
    if (!keep[i]) continue;
    const auto [l, d] = pairs[i];
    const double planted = truth.Evaluate(l, data.line_archetype[l], d, data.drug_family[d]);
    GdscRow row;
    row.drug_id = data.drugs[d].drug_id;
    row.cell_line = m.cell_lines[l];
    row.ln_ic50 = planted + noise;
    data.responses.push_back(row);
    data.planted.push_back(planted);
  }
  return data;
}

std::vector<std::filesystem::path> WriteSynthetic(const std::filesystem::path &dir,
                                                  const SyntheticData &data) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const char *name, const std::string &text) {
    written.push_back(dir / name);
    WriteTextFile(written.back(), text);
  };
  put("expression.csv", FormatExpressionCsv(data.expression));

  std::string cgc;
  for (const auto &g : data.cgc) cgc += g + "\n";
  put("cgc.txt", cgc);
  put("drugs.csv", FormatDrugTableCsv(data.drugs));
  put("gdsc.csv", FormatGdscCsv(data.responses));

  std::string truth = "cell_line,drug_id,planted_ln_ic50,archetype,family\n";
  for (std::size_t i = 0; i < data.responses.size(); ++i) {
    const auto &r = data.responses[i];
    const int l = data.expression.LineIndex(r.cell_line);
    int d = 0;
    while (data.drugs[d].drug_id != r.drug_id) ++d;
    truth += r.cell_line + "," + r.drug_id + "," + FormatDouble(data.planted[i]) + "," +
             std::to_string(data.line_archetype[l]) + "," + std::to_string(data.drug_family[d]) +
             "\n";
  }
  put("truth.csv", truth);

  std::string corpus = "# synthetic drug corpus\n";
  for (const auto &drug : data.drugs) corpus += drug.smiles + " " + drug.drug_id + "\n";
  put("corpus.smi", corpus);
  return written;
}

}  // namespace drp::data
