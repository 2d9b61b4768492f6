#include <filesystem>
#include <fstream>

#include "cglkit/error.hpp"
#include "cglkit/experiments.hpp"
#include "cglkit/matrix_io.hpp"

namespace cglkit {
namespace {

std::ofstream open(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return f;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
}

}  // namespace

nlohmann::json curve_summary(const CurveResult& r) {
  nlohmann::json j;
  j["snrdb"] = r.snrdb;
  j["bandwidth_noisy"] = r.bandwidth_noisy;
  j["bandwidth_clean"] = r.bandwidth_clean;
  const std::size_t at = r.config.report_rank;
  for (const auto& m : r.methods) {
    nlohmann::json e{{"cdf_at_report_rank", m.cdf.cdf(at)},
                     {"cdf_at_2nn", m.cdf.cdf(2 * r.config.nn)},
                     {"report_rank", at}};
    if (m.embedding) {
      e["m_noisy"] = m.m_noisy;
      e["m_clean"] = m.m_clean;
      e["eigenvalues"] = m.embedding->eigenvalues;
    }
    j["methods"][m.method] = e;
  }
  return j;
}

nlohmann::json image_summary(const ImageResult& r) {
  nlohmann::json j;
  j["sigma"] = r.sigma;
  j["c"] = r.c;
  j["bandwidth"] = r.bandwidth;
  j["shift_recovery"] = r.shift_recovery;
  if (r.snrdb) j["snrdb"] = *r.snrdb;
  for (const auto& m : r.methods) {
    j["methods"][m.method] = {{"per_class_spread", m.summary.per_class_spread},
                              {"per_class_mean", m.summary.per_class_mean},
                              {"global_consistency", m.summary.global_consistency},
                              {"top_eigenvalues", m.top_eigenvalues},
                              {"top_multiplicity", m.top_multiplicity}};
  }
  return j;
}

void write_curve_bundle(const std::string& dir, const CurveResult& r) {
  ensure_dir(dir);
  const std::filesystem::path base(dir);
  for (const auto& m : r.methods) {
    if (m.embedding) write_embedding_csv((base / ("embedding_" + m.method + ".csv")).string(), *m.embedding);
    auto f = open(base / ("rankcdf_" + m.method + ".csv"));
    f << "rank,cdf\n";
    for (const auto& [rank, v] : m.cdf.table()) f << rank << ',' << format_double(v) << '\n';
  }
  open(base / "summary.json") << curve_summary(r).dump(2) << '\n';
}

void write_image_bundle(const std::string& dir, const ImageResult& r) {
  ensure_dir(dir);
  const std::filesystem::path base(dir);
  for (const auto& m : r.methods) {
    write_alignment_csv((base / ("alignment_" + m.method + ".csv")).string(), m.z, r.class_id);
  }
  open(base / "summary.json") << image_summary(r).dump(2) << '\n';
}

}  // namespace cglkit
