#include "splat/subject.hpp"

#include <cctype>
#include <functional>
#include <sstream>

#include "splat/digest.hpp"
#include "splat/feature_model.hpp"

namespace splat {
namespace {

struct Token {
    enum class Kind { Ident, String, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    int line = 0;
    int column = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token next() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws_and_comments();
        current_ = Token{};
        current_.line = line_;
        current_.column = column_;
        if (pos_ >= text_.size()) {
            current_.kind = Token::Kind::End;
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            current_.kind = Token::Kind::Ident;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                current_.text.push_back(take());
        } else if (c == '"') {
            current_.kind = Token::Kind::String;
            take();
            while (pos_ < text_.size() && text_[pos_] != '"') current_.text.push_back(take());
            if (pos_ >= text_.size()) throw ParseError("unterminated string", line_, column_);
            take();
        } else {
            current_.kind = Token::Kind::Punct;
            current_.text.push_back(take());
        }
    }

    void skip_ws_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') take();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                break;
            }
        }
    }

    char take() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    Token current_;
};

}  // namespace

class SuiteParser {
public:
    SuiteParser(const std::string& text, const FeatureModel& fm) : lexer_(text), fm_(fm) {}

    Suite parse() {
        Suite suite;
        while (lexer_.peek().kind != Token::Kind::End) {
            Token head = expect_ident();
            if (head.text == "method") {
                Token name = expect_ident();
                if (suite.program.methods_.count(name.text))
                    throw ParseError("duplicate method '" + name.text + "'", name.line, name.column);
                expect_punct("{");
                suite.program.methods_[name.text] = parse_block();
            } else if (head.text == "test") {
                TestCase test;
                test.name = expect_ident().text;
                expect_keyword("entry");
                test.entry = expect_ident().text;
                expect_keyword("expect");
                Token verdict = expect_ident();
                if (verdict.text != "pass" && verdict.text != "fail")
                    throw ParseError("expected 'pass' or 'fail'", verdict.line, verdict.column);
                test.expect_pass = verdict.text == "pass";
                suite.tests.push_back(std::move(test));
            } else {
                throw ParseError("expected 'method' or 'test'", head.line, head.column);
            }
        }
        validate(suite);
        return suite;
    }

private:
    std::vector<Statement> parse_block() {
        std::vector<Statement> stmts;
        while (!(lexer_.peek().kind == Token::Kind::Punct && lexer_.peek().text == "}"))
            stmts.push_back(parse_statement());
        lexer_.next();  // consume '}'
        return stmts;
    }

    Statement parse_statement() {
        Token head = expect_ident();
        Statement stmt;
        if (head.text == "if") {
            stmt.kind = Statement::Kind::FeatureBranch;
            Token var = expect_ident();
            if (!fm_.is_declared(var.text))
                throw ParseError("undeclared feature variable '" + var.text + "'", var.line,
                                 var.column);
            stmt.name = var.text;
            expect_punct("{");
            stmt.then_block = parse_block();
            if (lexer_.peek().kind == Token::Kind::Ident && lexer_.peek().text == "else") {
                lexer_.next();
                expect_punct("{");
                stmt.else_block = parse_block();
            }
        } else if (head.text == "call") {
            stmt.kind = Statement::Kind::Call;
            stmt.name = expect_ident().text;
        } else if (head.text == "assert") {
            stmt.kind = Statement::Kind::Assert;
            stmt.expr = parse_or();
        } else if (head.text == "fail") {
            stmt.kind = Statement::Kind::Fail;
            Token msg = lexer_.next();
            if (msg.kind != Token::Kind::String)
                throw ParseError("expected string after 'fail'", msg.line, msg.column);
            stmt.message = msg.text;
        } else if (head.text == "pass") {
            stmt.kind = Statement::Kind::Pass;
        } else {
            throw ParseError("unknown statement '" + head.text + "'", head.line, head.column);
        }
        return stmt;
    }

    std::shared_ptr<BoolExpr> parse_or() {
        auto lhs = parse_and();
        while (lexer_.peek().kind == Token::Kind::Punct && lexer_.peek().text == "|") {
            lexer_.next();
            auto expr = std::make_shared<BoolExpr>();
            expr->kind = BoolExpr::Kind::Or;
            expr->lhs = lhs;
            expr->rhs = parse_and();
            lhs = expr;
        }
        return lhs;
    }

    std::shared_ptr<BoolExpr> parse_and() {
        auto lhs = parse_unary();
        while (lexer_.peek().kind == Token::Kind::Punct && lexer_.peek().text == "&") {
            lexer_.next();
            auto expr = std::make_shared<BoolExpr>();
            expr->kind = BoolExpr::Kind::And;
            expr->lhs = lhs;
            expr->rhs = parse_unary();
            lhs = expr;
        }
        return lhs;
    }

    std::shared_ptr<BoolExpr> parse_unary() {
        const Token& head = lexer_.peek();
        if (head.kind == Token::Kind::Punct && head.text == "!") {
            lexer_.next();
            auto expr = std::make_shared<BoolExpr>();
            expr->kind = BoolExpr::Kind::Not;
            expr->lhs = parse_unary();
            return expr;
        }
        if (head.kind == Token::Kind::Punct && head.text == "(") {
            lexer_.next();
            auto expr = parse_or();
            expect_punct(")");
            return expr;
        }
        Token name = expect_ident();
        if (!fm_.is_declared(name.text))
            throw ParseError("undeclared feature variable '" + name.text + "'", name.line,
                             name.column);
        auto expr = std::make_shared<BoolExpr>();
        expr->kind = BoolExpr::Kind::Feature;
        expr->feature = name.text;
        return expr;
    }

    void validate(const Suite& suite) const {
        const auto& methods = suite.program.methods();
        for (const auto& [name, body] : methods) {
            walk(body, [&](const Statement& s) {
                if (s.kind == Statement::Kind::Call && !methods.count(s.name))
                    throw ParseError("call to undeclared method '" + s.name + "'", 0, 0);
            });
        }
        check_acyclic(methods);
        for (const auto& test : suite.tests)
            if (!methods.count(test.entry))
                throw ParseError("test '" + test.name + "' enters undeclared method '" + test.entry +
                                     "'",
                                 0, 0);
    }

    static void walk(const std::vector<Statement>& block,
                     const std::function<void(const Statement&)>& fn) {
        for (const auto& s : block) {
            fn(s);
            if (s.kind == Statement::Kind::FeatureBranch) {
                walk(s.then_block, fn);
                walk(s.else_block, fn);
            }
        }
    }

    static void check_acyclic(const std::map<std::string, std::vector<Statement>>& methods) {
        // 0 unvisited, 1 on path, 2 done
        std::map<std::string, int> mark;
        std::function<void(const std::string&)> visit = [&](const std::string& name) {
            int& m = mark[name];
            if (m == 1) throw ParseError("call-graph cycle through method '" + name + "'", 0, 0);
            if (m == 2) return;
            m = 1;
            walk(methods.at(name), [&](const Statement& s) {
                if (s.kind == Statement::Kind::Call) visit(s.name);
            });
            m = 2;
        };
        for (const auto& [name, body] : methods) visit(name);
    }

    Token expect_ident() {
        Token t = lexer_.next();
        if (t.kind != Token::Kind::Ident)
            throw ParseError("expected identifier, got '" + t.text + "'", t.line, t.column);
        return t;
    }

    void expect_keyword(const std::string& kw) {
        Token t = expect_ident();
        if (t.text != kw) throw ParseError("expected '" + kw + "'", t.line, t.column);
    }

    void expect_punct(const std::string& p) {
        Token t = lexer_.next();
        if (t.kind != Token::Kind::Punct || t.text != p)
            throw ParseError("expected '" + p + "'", t.line, t.column);
    }

    Lexer lexer_;
    const FeatureModel& fm_;
};

Suite parse_suite(const std::string& text, const FeatureModel& fm) {
    return SuiteParser(text, fm).parse();
}

namespace {

bool eval_expr(const BoolExpr& expr, ExecutionMonitor& monitor) {
    switch (expr.kind) {
        case BoolExpr::Kind::Feature:
            return monitor.feature_read(expr.feature);
        case BoolExpr::Kind::Not:
            return !eval_expr(*expr.lhs, monitor);
        case BoolExpr::Kind::And: {
            // Both operands are evaluated so the set of feature reads does
            // not depend on operand values.
            bool l = eval_expr(*expr.lhs, monitor);
            bool r = eval_expr(*expr.rhs, monitor);
            return l && r;
        }
        case BoolExpr::Kind::Or: {
            bool l = eval_expr(*expr.lhs, monitor);
            bool r = eval_expr(*expr.rhs, monitor);
            return l || r;
        }
    }
    return false;
}

std::string expr_to_string(const BoolExpr& expr) {
    switch (expr.kind) {
        case BoolExpr::Kind::Feature:
            return expr.feature;
        case BoolExpr::Kind::Not:
            return "!(" + expr_to_string(*expr.lhs) + ")";
        case BoolExpr::Kind::And:
            return "(" + expr_to_string(*expr.lhs) + "&" + expr_to_string(*expr.rhs) + ")";
        case BoolExpr::Kind::Or:
            return "(" + expr_to_string(*expr.lhs) + "|" + expr_to_string(*expr.rhs) + ")";
    }
    return "";
}

// Fails are reported through an exception so deeply nested interpretation
// unwinds to the entry point.
struct TestFailure {
    std::string message;
};

class Interpreter {
public:
    Interpreter(const Program& program, ExecutionMonitor& monitor)
        : program_(program), monitor_(monitor) {}

    void run_method(const std::string& name) {
        monitor_.method_entered(name);
        run_block(program_.methods().at(name));
    }

private:
    void run_block(const std::vector<Statement>& block) {
        for (const auto& stmt : block) {
            switch (stmt.kind) {
                case Statement::Kind::FeatureBranch:
                    if (monitor_.feature_read(stmt.name))
                        run_block(stmt.then_block);
                    else
                        run_block(stmt.else_block);
                    break;
                case Statement::Kind::Call:
                    run_method(stmt.name);
                    break;
                case Statement::Kind::Assert:
                    if (!eval_expr(*stmt.expr, monitor_))
                        throw TestFailure{"assertion failed: " + expr_to_string(*stmt.expr)};
                    break;
                case Statement::Kind::Fail:
                    throw TestFailure{stmt.message};
                case Statement::Kind::Pass:
                    break;
            }
        }
    }

    const Program& program_;
    ExecutionMonitor& monitor_;
};

void normalize_block(const std::vector<Statement>& block, std::string& out) {
    for (const auto& stmt : block) {
        switch (stmt.kind) {
            case Statement::Kind::FeatureBranch:
                out += "if(" + stmt.name + "){";
                normalize_block(stmt.then_block, out);
                out += "}else{";
                normalize_block(stmt.else_block, out);
                out += "}";
                break;
            case Statement::Kind::Call:
                out += "call(" + stmt.name + ");";
                break;
            case Statement::Kind::Assert:
                out += "assert(" + expr_to_string(*stmt.expr) + ");";
                break;
            case Statement::Kind::Fail:
                out += "fail(" + stmt.message + ");";
                break;
            case Statement::Kind::Pass:
                out += "pass;";
                break;
        }
    }
}

}  // namespace

Verdict Program::execute(const TestCase& test, ExecutionMonitor& monitor) const {
    if (!has_method(test.entry)) throw Error("test entry method '" + test.entry + "' not declared");
    try {
        Interpreter(*this, monitor).run_method(test.entry);
    } catch (const TestFailure& failure) {
        return Verdict{false, failure.message};
    }
    return Verdict{true, ""};
}

std::map<std::string, std::string> Program::method_digests() const {
    std::map<std::string, std::string> out;
    for (const auto& [name, body] : methods_) {
        std::string normalized;
        normalize_block(body, normalized);
        out[name] = digest_hex(normalized);
    }
    return out;
}

ChangeSet diff_methods(const Program& older, const Program& newer) {
    auto old_digests = older.method_digests();
    auto new_digests = newer.method_digests();
    ChangeSet changes;
    for (const auto& [name, digest] : old_digests) {
        auto it = new_digests.find(name);
        if (it == new_digests.end() || it->second != digest) changes.changed.insert(name);
    }
    for (const auto& [name, digest] : new_digests)
        if (!old_digests.count(name)) changes.changed.insert(name);
    return changes;
}

}  // namespace splat
