#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "virtree/defs.hpp"
#include "virtree/metamodel.hpp"
#include "virtree/model.hpp"

namespace vt_test {

inline std::string fixture_path(const std::string& name) {
    return std::string(VIRTREE_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline const virtree::Metamodel& fixture_metamodel() {
    static virtree::Metamodel mm = virtree::load_metamodel_file(fixture_path("widgets.mm"));
    return mm;
}

inline const std::vector<virtree::VirtualWidgetDef>& fixture_defs() {
    static std::vector<virtree::VirtualWidgetDef> defs =
        virtree::load_defs_dir(fixture_path("defs"));
    return defs;
}

inline virtree::Model fixture_model() {
    return virtree::load_model(read_file(fixture_path("request_form.xml")), "request_form.xml");
}

} // namespace vt_test
