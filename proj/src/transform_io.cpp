#include "fetreg/transform_io.hpp"

#include <fstream>
#include <sstream>

#include "fetreg/error.hpp"

namespace fetreg {

nlohmann::json to_json(const AffineTransform& t) {
    return nlohmann::json{{"a11", t.a11}, {"a12", t.a12}, {"a21", t.a21},
                          {"a22", t.a22}, {"tx", t.tx},   {"ty", t.ty}};
}

AffineTransform transform_from_json(const nlohmann::json& j) {
    return AffineTransform::from_params(j.at("a11").get<double>(), j.at("a12").get<double>(),
                                        j.at("a21").get<double>(), j.at("a22").get<double>(),
                                        j.at("tx").get<double>(), j.at("ty").get<double>());
}

void save_transforms_csv(const std::vector<AffineTransform>& transforms,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "a11,a12,a21,a22,tx,ty\n";
    out.precision(17);
    for (const auto& t : transforms) {
        out << t.a11 << ',' << t.a12 << ',' << t.a21 << ',' << t.a22 << ',' << t.tx << ','
            << t.ty << '\n';
    }
    if (!out) throw IoError("cannot write '" + path.string() + "': write failed");
}

std::vector<AffineTransform> load_transforms_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::vector<AffineTransform> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string field;
        double v[6];
        int n = 0;
        bool numeric = true;
        while (std::getline(row, field, ',') && n < 7) {
            if (n == 6) { n = 7; break; }
            try {
                std::size_t used = 0;
                v[n] = std::stod(field, &used);
                // Trailing junk (beyond \r) means a non-numeric field.
                while (used < field.size() && (field[used] == '\r' || field[used] == ' ')) ++used;
                if (used != field.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
            if (!numeric) break;
            ++n;
        }
        if (!numeric && lineno == 1) continue;  // header line
        if (!numeric || n != 6) {
            throw IoError("'" + path.string() + "' line " + std::to_string(lineno) +
                          ": expected 6 numeric fields a11,a12,a21,a22,tx,ty");
        }
        out.push_back(AffineTransform::from_params(v[0], v[1], v[2], v[3], v[4], v[5]));
    }
    return out;
}

}  // namespace fetreg
