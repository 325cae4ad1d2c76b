#include "structmap/geometry/ply.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace structmap {

void write_ply(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw Error("write_ply: cannot open " + path);
    out << "ply\n"
        << "format ascii 1.0\n"
        << "comment frame " << frame_name(cloud.frame) << "\n"
        << "element vertex " << cloud.size() << "\n"
        << "property double x\n"
        << "property double y\n"
        << "property double z\n"
        << "end_header\n";
    char line[96];
    for (const auto& p : cloud.points) {
        std::snprintf(line, sizeof(line), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << line;
    }
}

PointCloud read_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_ply: cannot open " + path);

    PointCloud cloud;
    std::string line;
    std::size_t count = 0;
    bool header_done = false;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "element") {
            std::string what;
            ss >> what >> count;
            if (what != "vertex") throw Error("read_ply: unsupported element " + what);
        } else if (tok == "comment") {
            std::string key, value;
            ss >> key >> value;
            if (key == "frame") {
                if (value == "robot") cloud.frame = FrameTag::Robot;
                else if (value == "camera") cloud.frame = FrameTag::Camera;
                else cloud.frame = FrameTag::Global;
            }
        } else if (tok == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "ascii") throw Error("read_ply: only ascii supported");
        } else if (tok == "end_header") {
            header_done = true;
            break;
        }
    }
    if (!header_done) throw Error("read_ply: missing end_header in " + path);

    cloud.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw Error("read_ply: truncated vertex list");
        Vec3 p;
        if (std::sscanf(line.c_str(), "%lf %lf %lf", &p.x(), &p.y(), &p.z()) != 3) {
            throw Error("read_ply: bad vertex line '" + line + "'");
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

}  // namespace structmap
