#include "eduvsum/eval/ablation.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::eval {

using features::Modality;
using features::ModalitySet;

namespace {

int backbone_rank(const std::string& name) {
    static const std::vector<std::string> order{"vgg16", "resnet50", "inceptionv3", "xception"};
    const auto it = std::find(order.begin(), order.end(), name);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

// "v,a,t" order with absent modalities ranked after present ones.
std::string modality_sort_key(const std::string& spec) {
    const auto set = ModalitySet::parse(spec);
    return std::string{set.visual ? '0' : '1', set.audio ? '0' : '1', set.text ? '0' : '1'};
}

std::string flag(const std::string& spec, Modality m) { return ModalitySet::parse(spec).contains(m) ? "x" : ""; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

}  // namespace

AblationTable build_ablation_table(std::span<const EvaluationReport> reports) {
    if (reports.empty()) fail(ErrorKind::InvalidInput, "ablation table needs at least one report");
    AblationTable table;
    std::set<std::tuple<std::string, int, std::string>> seen;
    for (const auto& r : reports) {
        const std::string mods = ModalitySet::parse(r.modalities).to_string();
        if (!seen.emplace(r.backbone, r.history, mods).second) {
            const std::string key = fmt::format("{} h={} {}", r.backbone, r.history, mods);
            spdlog::warn("duplicate ablation row {}; keeping the first report", key);
            table.duplicates.push_back(key);
            continue;
        }
        table.rows.push_back({r.backbone, r.history, mods, r.top1, r.top2, r.top3, r.mae_fra, r.mae_seg});
    }
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const AblationRow& a, const AblationRow& b) {
        return std::make_tuple(backbone_rank(a.backbone), a.backbone, a.history, modality_sort_key(a.modalities)) <
               std::make_tuple(backbone_rank(b.backbone), b.backbone, b.history, modality_sort_key(b.modalities));
    });
    return table;
}

std::string AblationTable::to_csv() const {
    std::string out = "backbone,history,V,A,T,top1,top2,top3,mae_fra,mae_seg\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}\n", r.backbone, r.history,
                           flag(r.modalities, Modality::Visual), flag(r.modalities, Modality::Audio),
                           flag(r.modalities, Modality::Text), r.top1, r.top2, r.top3, r.mae_fra, r.mae_seg);
    }
    return out;
}

std::string AblationTable::to_text() const {
    std::size_t width = 8;
    for (const auto& r : rows) width = std::max(width, r.backbone.size());
    std::string out = fmt::format("{:<{}}  {:>2}  V A T  {:>6}  {:>6}  {:>6}  {:>7}  {:>7}\n", "backbone", width, "h",
                                  "top1", "top2", "top3", "avg_fra", "avg_seg");
    std::string previous;
    for (const auto& r : rows) {
        if (!previous.empty() && r.backbone != previous) out += '\n';
        previous = r.backbone;
        auto mark = [&](Modality m) { return flag(r.modalities, m).empty() ? '.' : 'x'; };
        out += fmt::format("{:<{}}  {:>2}  {} {} {}  {:>6.2f}  {:>6.2f}  {:>6.2f}  {:>7.2f}  {:>7.2f}\n", r.backbone,
                           width, r.history, mark(Modality::Visual), mark(Modality::Audio), mark(Modality::Text),
                           r.top1, r.top2, r.top3, r.mae_fra, r.mae_seg);
    }
    return out;
}

void write_ablation(const AblationTable& table, const std::filesystem::path& csv_path,
                    const std::filesystem::path& text_path) {
    write_text(csv_path, table.to_csv());
    write_text(text_path, table.to_text());
}

}  // namespace eduvsum::eval
