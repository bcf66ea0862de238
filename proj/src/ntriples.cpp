#include "kgtox/errors.hpp"
#include "kgtox/io.hpp"
#include "kgtox/kg.hpp"

#include <fstream>
#include <sstream>

namespace kgtox {

namespace {

struct LineCursor {
    const std::string& line;
    std::size_t pos = 0;
    std::size_t line_no;

    void skip_ws() {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    }
    bool at_end() const { return pos >= line.size(); }
    char peek() const { return line[pos]; }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_no, msg); }
};

std::string parse_iri(LineCursor& c) {
    if (c.at_end() || c.peek() != '<') c.fail("expected '<'");
    const std::size_t close = c.line.find('>', c.pos + 1);
    if (close == std::string::npos) c.fail("unterminated IRI");
    std::string iri = c.line.substr(c.pos + 1, close - c.pos - 1);
    if (iri.empty()) c.fail("empty IRI");
    c.pos = close + 1;
    return iri;
}

std::string parse_quoted(LineCursor& c) {
    // c.peek() == '"'
    std::string out;
    std::size_t i = c.pos + 1;
    while (i < c.line.size()) {
        const char ch = c.line[i];
        if (ch == '"') {
            c.pos = i + 1;
            return out;
        }
        if (ch == '\\') {
            if (i + 1 >= c.line.size()) c.fail("dangling escape in literal");
            const char esc = c.line[i + 1];
            switch (esc) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                default: c.fail(std::string("unsupported escape \\") + esc);
            }
            i += 2;
            continue;
        }
        out.push_back(ch);
        ++i;
    }
    c.fail("unterminated literal");
}

Term parse_object(LineCursor& c) {
    if (c.at_end()) c.fail("missing object");
    if (c.peek() == '<') return Term::iri(parse_iri(c));
    if (c.peek() == '"') {
        std::string lexical = parse_quoted(c);
        std::string datatype;
        if (c.pos + 1 < c.line.size() && c.line[c.pos] == '^' && c.line[c.pos + 1] == '^') {
            c.pos += 2;
            datatype = parse_iri(c);
        }
        return Term::literal(std::move(lexical), std::move(datatype));
    }
    c.fail("object must be an IRI or a quoted literal");
}

std::string escape_literal(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

void write_term(std::string& out, const Term& t) {
    if (t.is_iri()) {
        out += '<';
        out += t.lexical;
        out += '>';
        return;
    }
    out += '"';
    out += escape_literal(t.lexical);
    out += '"';
    if (!t.datatype.empty()) {
        out += "^^<";
        out += t.datatype;
        out += '>';
    }
}

} // namespace

KnowledgeGraph load_ntriples(std::istream& in) {
    KnowledgeGraph kg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        LineCursor c{line, 0, line_no};
        c.skip_ws();
        if (c.at_end() || c.peek() == '#') continue;

        const std::string subject = parse_iri(c);
        c.skip_ws();
        const std::string predicate = parse_iri(c);
        c.skip_ws();
        const Term object = parse_object(c);
        c.skip_ws();
        if (c.at_end() || c.peek() != '.') c.fail("expected terminal '.'");
        ++c.pos;
        c.skip_ws();
        if (!c.at_end()) c.fail("trailing content after '.'");

        kg.add(Term::iri(subject), predicate, object);
    }
    return kg;
}

KnowledgeGraph load_ntriples_string(const std::string& text) {
    std::istringstream in(text);
    return load_ntriples(in);
}

KnowledgeGraph load_ntriples_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return load_ntriples(in);
}

std::string KnowledgeGraph::serialize_ntriples() const {
    std::string out;
    for (const Triple& t : triples_) {
        write_term(out, nodes_[t.subject]);
        out += ' ';
        out += '<';
        out += relations_[t.predicate];
        out += '>';
        out += ' ';
        write_term(out, nodes_[t.object]);
        out += " .\n";
    }
    return out;
}

} // namespace kgtox
