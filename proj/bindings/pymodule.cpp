// Python bindings for the comment-updater core: tokenization, edit scripts,
// syntax/dataflow inspection, masks, metrics and trained-model inference.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "comet/edit_script.hpp"
#include "comet/json_io.hpp"
#include "comet/metrics.hpp"
#include "comet/pipeline.hpp"
#include "comet/tokenize.hpp"

namespace py = pybind11;
using namespace comet;

namespace {

std::vector<std::string> py_tokenize_code(const std::string& source) {
    return token_texts(tokenize_code(source));
}

std::vector<std::string> py_split_subtokens(
    const std::vector<std::string>& tokens) {
    TokenSeq in;
    for (const auto& t : tokens) in.push_back(code_token(t));
    return token_texts(split_subtokens(in).subtokens);
}

std::vector<std::string> py_clean_comment(const std::string& raw) {
    return token_texts(clean_comment(raw));
}

TokenSeq words(const std::vector<std::string>& texts) {
    TokenSeq out;
    for (const auto& t : texts) out.push_back(comment_word(t));
    return out;
}

std::vector<std::string> py_diff(const std::vector<std::string>& old_tokens,
                                 const std::vector<std::string>& new_tokens) {
    return token_texts(
        serialize(diff_tokens(words(old_tokens), words(new_tokens))).tokens);
}

std::vector<std::string> py_comment_edits(
    const std::vector<std::string>& old_comment,
    const std::vector<std::string>& new_comment) {
    return token_texts(
        serialize(build_comment_edit_seq(words(old_comment),
                                         words(new_comment)))
            .tokens);
}

std::vector<std::string> py_find_insert_tag(
    const std::vector<std::string>& old_comment, std::size_t position) {
    return token_texts(find_insert_tag(words(old_comment), position));
}

std::vector<std::string> py_apply_edits(
    const std::vector<std::string>& old_comment,
    const std::vector<std::string>& script_tokens) {
    EditScript script =
        deserialize(words(script_tokens), ScriptSide::CommentSide);
    return token_texts(apply_edits(words(old_comment), script));
}

std::string py_inspect(const std::string& old_code, const std::string& new_code,
                       const std::string& old_comment,
                       const std::string& new_comment, bool dump_masks) {
    Sample s;
    s.id = "py";
    s.old_code = old_code;
    s.new_code = new_code;
    s.old_comment = old_comment;
    s.new_comment = new_comment;
    ModelConfig cfg;
    Preprocessed pre = preprocess(s, cfg, !new_comment.empty());
    return inspect_to_json(pre, dump_masks);
}

EvalRecord make_record(const std::vector<std::string>& old_comment,
                       const std::vector<std::string>& gold,
                       const std::vector<std::vector<std::string>>& preds) {
    return EvalRecord{old_comment, gold, preds};
}

class PyModel {
public:
    explicit PyModel(const std::string& path)
        : model_(Model::from_json(read_text_file(path))) {}

    py::dict predict(const std::string& old_code, const std::string& new_code,
                     const std::string& old_comment) {
        Sample s;
        s.id = "py";
        s.old_code = old_code;
        s.new_code = new_code;
        s.old_comment = old_comment;
        Prediction p = predict_sample(model_, s, model_.config());
        py::dict out;
        out["no_update"] = p.no_update;
        out["updated_comment"] = p.updated_comment;
        out["candidates"] = p.candidates;
        return out;
    }

private:
    Model model_;
};

}  // namespace

PYBIND11_MODULE(pycomet, m) {
    m.doc() = "comment updater core";

    m.def("tokenize_code", &py_tokenize_code, py::arg("source"),
          "Lex a code snippet into tokens.");
    m.def("split_subtokens", &py_split_subtokens, py::arg("tokens"),
          "Split camelCase/snake_case compounds.");
    m.def("clean_comment", &py_clean_comment, py::arg("raw"),
          "Strip comment symbols and HTML tags, then subtokenize.");
    m.def("diff_tokens", &py_diff, py::arg("old_tokens"), py::arg("new_tokens"),
          "Serialized code-side edit script between two token lists.");
    m.def("build_comment_edit_seq", &py_comment_edits, py::arg("old_comment"),
          py::arg("new_comment"),
          "Serialized comment-side edit script (KEEP-free, tagged inserts).");
    m.def("find_insert_tag", &py_find_insert_tag, py::arg("old_comment"),
          py::arg("position"),
          "Shortest unique token suffix before an insertion point.");
    m.def("apply_edits", &py_apply_edits, py::arg("old_comment"),
          py::arg("script_tokens"),
          "Apply a serialized comment-side script to the old comment.");
    m.def("inspect", &py_inspect, py::arg("old_code"), py::arg("new_code"),
          py::arg("old_comment"), py::arg("new_comment") = "",
          py::arg("dump_masks") = false,
          "Preprocess one sample and dump scripts/graph/flows as JSON.");

    m.def("levenshtein", &levenshtein, py::arg("a"), py::arg("b"));
    m.def(
        "evaluate",
        [](const std::vector<py::tuple>& records) {
            std::vector<EvalRecord> rs;
            for (const auto& t : records)
                rs.push_back(make_record(
                    t[0].cast<std::vector<std::string>>(),
                    t[1].cast<std::vector<std::string>>(),
                    t[2].cast<std::vector<std::vector<std::string>>>()));
            EvalReport rep = evaluate(rs);
            py::dict out;
            out["accuracy"] = rep.accuracy;
            out["recall_at_5"] = rep.recall_at_5;
            out["aed"] = rep.aed;
            out["red"] = rep.red;
            out["gleu"] = rep.gleu;
            out["sari"] = rep.sari;
            out["n"] = rep.n;
            out["excluded_degenerate"] = rep.excluded_degenerate;
            return out;
        },
        py::arg("records"),
        "Evaluate (old_comment, gold, predictions) tuples.");

    py::class_<PyModel>(m, "Model")
        .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
        .def("predict", &PyModel::predict, py::arg("old_code"),
             py::arg("new_code"), py::arg("old_comment"));
}
