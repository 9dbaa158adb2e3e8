// Regenerates the bundled model files. Usage: make_reference_model <out_dir>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "sentinel/classifier.hpp"

namespace {

using namespace sentinel;

void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

// 28x28 grayscale demo head: flatten -> dense -> softmax, manifest only.
ModelSpec demo_28x28() {
    ModelSpec m;
    m.name = "demo-28x28";
    m.input_h = 28;
    m.input_w = 28;
    m.input_c = 1;
    m.class_labels = {"normal", "crime"};
    m.layers.push_back(LayerSpec{.kind = LayerKind::flatten});
    LayerSpec fc;
    fc.kind = LayerKind::dense;
    fc.in_dim = 28 * 28;
    fc.out_dim = 2;
    m.layers.push_back(fc);
    m.layers.push_back(LayerSpec{.kind = LayerKind::softmax});
    return m;
}

// Full-HD head taken straight onto a dense layer; weights far too large to
// bundle (~506 MiB), so the manifest ships alone for shape/count reporting.
ModelSpec uhd_1920x1080() {
    ModelSpec m;
    m.name = "uhd-1920x1080";
    m.input_h = 1080;
    m.input_w = 1920;
    m.input_c = 1;
    m.class_labels = {"normal", "crime"};
    m.layers.push_back(LayerSpec{.kind = LayerKind::flatten});
    LayerSpec fc1;
    fc1.kind = LayerKind::dense;
    fc1.in_dim = 1920 * 1080;
    fc1.out_dim = 64;
    m.layers.push_back(fc1);
    m.layers.push_back(LayerSpec{.kind = LayerKind::relu});
    LayerSpec fc2;
    fc2.kind = LayerKind::dense;
    fc2.in_dim = 64;
    fc2.out_dim = 2;
    m.layers.push_back(fc2);
    m.layers.push_back(LayerSpec{.kind = LayerKind::softmax});
    return m;
}

void emit(const std::filesystem::path& dir, const std::string& stem, const ModelSpec& model) {
    const std::string manifest = serialize_manifest(model);
    write_file(dir / (stem + ".json"), manifest.data(), manifest.size());
    if (model.has_weights()) {
        const std::vector<std::uint8_t> blob = serialize_weights(model);
        write_file(dir / (stem + ".weights"), blob.data(), blob.size());
    }
    std::cout << stem << ": " << model.parameter_count() << " parameters\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_reference_model <out_dir>\n";
        return 1;
    }
    try {
        const std::filesystem::path dir = argv[1];
        std::filesystem::create_directories(dir);
        emit(dir, "intensity_4x4", intensity_model());
        emit(dir, "demo_28x28", demo_28x28());
        emit(dir, "uhd_1920x1080", uhd_1920x1080());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
