#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace superwriter {

struct prompt_template {
    std::string              id;
    std::string              body;
    std::vector<std::string> placeholders; // required slot names
};

// Registry of prompt templates and auxiliary fixture texts. The built-in
// registry is embedded from the fixture files at build time; a directory of
// .txt files with the same names can replace it at runtime.
//
// Rendering substitutes {name} only for names registered (or explicitly
// bound) for the template, so literal braces elsewhere in a template pass
// through untouched. A required name absent from the bindings raises
// errc::missing_binding.
class prompt_library {
  public:
    static const prompt_library & builtin();
    static prompt_library from_dir(const std::filesystem::path & dir);

    const prompt_template & get(std::string_view id) const;
    bool has(std::string_view id) const;

    // Raw fixture text by file stem; includes auxiliary texts that are not
    // renderable templates (thinking template, criteria pool, schemas).
    const std::string & fixture(std::string_view name) const;

    std::string render(std::string_view id,
                       const std::map<std::string, std::string> & bindings) const;

    // Ids of the renderable pipeline templates, in pipeline order.
    static const std::vector<std::string> & template_ids();

  private:
    prompt_library() = default;
    void index_templates();

    std::map<std::string, std::string, std::less<>>     fixtures_;
    std::map<std::string, prompt_template, std::less<>> templates_;
};

} // namespace superwriter
