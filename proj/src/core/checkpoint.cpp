#include "core/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace oodcl::checkpoint {

namespace {

constexpr const char* kMagic = "oodcl-checkpoint v1";

const char* tensor_name(std::size_t i) {
  static const char* names[] = {"enc_w1",  "enc_b1",  "enc_w2",  "enc_b2",
                                "head_w1", "head_b1", "head_w2", "head_b2"};
  return names[i];
}

struct Shape {
  std::size_t rows, cols;
};

std::vector<Shape> tensor_shapes(const net::NetworkDims& d) {
  return {{d.hidden_dim, d.input_dim}, {1, d.hidden_dim},
          {d.feat_dim, d.hidden_dim},  {1, d.feat_dim},
          {d.hidden_dim, d.feat_dim},  {1, d.hidden_dim},
          {d.head_dim, d.hidden_dim},  {1, d.head_dim}};
}

void write_block(std::FILE* f, const char* name, std::size_t rows,
                 std::size_t cols, std::span<const double> data) {
  std::fprintf(f, "tensor %s %zu %zu\n", name, rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::fprintf(f, c + 1 < cols ? "%.17g " : "%.17g", data[r * cols + c]);
    }
    std::fputc('\n', f);
  }
}

}  // namespace

void save_model(const train::TrainedModel& model,
                const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  std::fprintf(f, "%s\n", kMagic);
  std::fprintf(f, "kind %s\n",
               model.kind == train::ClassifierKind::Prototypes ? "prototypes"
                                                               : "linear");
  const auto& d = model.params.dims;
  std::fprintf(f, "dims %zu %zu %zu %zu\n", d.input_dim, d.hidden_dim,
               d.feat_dim, d.head_dim);
  std::fprintf(f, "classes %zu", model.protos.class_ids.size());
  for (int c : model.protos.class_ids) std::fprintf(f, " %d", c);
  std::fputc('\n', f);

  const auto tensors = net::tensor_views(model.params);
  const auto shapes = tensor_shapes(d);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    write_block(f, tensor_name(i), shapes[i].rows, shapes[i].cols, tensors[i]);
  }
  const vec::Matrix& cls = model.kind == train::ClassifierKind::Prototypes
                               ? model.protos.vectors
                               : model.linear;
  write_block(f, "classifier", cls.rows, cls.cols, cls.data);
  if (std::fclose(f) != 0) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

namespace {

vec::Matrix read_block(std::istream& in, const std::string& path,
                       const char* expected_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path + ": missing tensor block '" +
                     std::string(expected_name) + "'");
  }
  char name[64];
  std::size_t rows = 0, cols = 0;
  if (std::sscanf(line.c_str(), "tensor %63s %zu %zu", name, &rows, &cols) != 3 ||
      std::strcmp(name, expected_name) != 0) {
    throw ParseError(path + ": bad tensor header '" + line + "', expected '" +
                     expected_name + "'");
  }
  vec::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw ParseError(path + ": truncated tensor '" + name + "'");
    }
    std::stringstream ss(line);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!(ss >> m.at(r, c))) {
        throw ParseError(path + ": bad value in tensor '" + std::string(name) +
                         "' row " + std::to_string(r));
      }
    }
  }
  return m;
}

}  // namespace

train::TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string p = path.string();
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw ParseError(p + ": not an oodcl checkpoint (bad magic line)");
  }

  train::TrainedModel model;
  if (!std::getline(in, line)) throw ParseError(p + ": missing kind line");
  if (line == "kind prototypes") {
    model.kind = train::ClassifierKind::Prototypes;
  } else if (line == "kind linear") {
    model.kind = train::ClassifierKind::Linear;
  } else {
    throw ParseError(p + ": bad kind line '" + line + "'");
  }

  net::NetworkDims d;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "dims %zu %zu %zu %zu", &d.input_dim,
                  &d.hidden_dim, &d.feat_dim, &d.head_dim) != 4) {
    throw ParseError(p + ": bad dims line");
  }
  d.validate();
  model.params.dims = d;

  if (!std::getline(in, line)) throw ParseError(p + ": missing classes line");
  {
    std::stringstream ss(line);
    std::string tag;
    std::size_t k = 0;
    if (!(ss >> tag >> k) || tag != "classes") {
      throw ParseError(p + ": bad classes line '" + line + "'");
    }
    model.protos.class_ids.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      if (!(ss >> model.protos.class_ids[i])) {
        throw ParseError(p + ": truncated classes line");
      }
    }
  }

  const auto shapes = tensor_shapes(d);
  std::vector<vec::Matrix> blocks;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    vec::Matrix m = read_block(in, p, tensor_name(i));
    if (m.rows != shapes[i].rows || m.cols != shapes[i].cols) {
      throw ParseError(p + ": tensor '" + tensor_name(i) +
                       "' has the wrong shape for the stated dims");
    }
    blocks.push_back(std::move(m));
  }
  model.params.enc_w1 = std::move(blocks[0]);
  model.params.enc_b1 = std::move(blocks[1].data);
  model.params.enc_w2 = std::move(blocks[2]);
  model.params.enc_b2 = std::move(blocks[3].data);
  model.params.head_w1 = std::move(blocks[4]);
  model.params.head_b1 = std::move(blocks[5].data);
  model.params.head_w2 = std::move(blocks[6]);
  model.params.head_b2 = std::move(blocks[7].data);

  vec::Matrix cls = read_block(in, p, "classifier");
  if (cls.rows != model.protos.class_ids.size() || cls.cols != d.feat_dim) {
    throw ParseError(p + ": classifier shape does not match classes/dims");
  }
  if (model.kind == train::ClassifierKind::Prototypes) {
    model.protos.vectors = std::move(cls);
  } else {
    model.linear = std::move(cls);
  }
  return model;
}

void save_history(const train::TrainedModel& model,
                  const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  std::fprintf(f,
               "# epoch supcon tightness ood_head ood_encoder energy_margin "
               "total lr\n");
  for (const auto& h : model.history) {
    std::fprintf(f, "%zu %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", h.epoch,
                 h.supcon, h.tightness, h.ood_head, h.ood_encoder,
                 h.energy_margin, h.total, h.lr);
  }
  if (std::fclose(f) != 0) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

}  // namespace oodcl::checkpoint
