use std::fmt::Write;

use super::ast::{Decl, OpSpec, Scenario};
use crate::model::{write_string_literal, Address};

/// Canonical text of `s`. Parsing the result gives back `s`.
pub fn print_scenario(s: &Scenario) -> String {
    let mut out = String::from("scenario ");
    write_quoted(&mut out, &s.name);
    out.push('\n');
    for d in &s.decls {
        match d {
            Decl::Account { addr, balance } => writeln!(out, "account {addr} balance {balance}"),
            Decl::Contract {
                addr,
                code,
                config,
                storage,
                balance,
                contextual,
            } => {
                write!(out, "contract {addr} code {code} config {config} storage {storage} balance {balance}").unwrap();
                writeln!(out, "{}", if *contextual { " contextual" } else { "" })
            }
            Decl::Strategy(st) => writeln!(out, "strategy {st}"),
            Decl::Features(fs) => {
                let names: Vec<_> = fs.iter().map(|f| f.name()).collect();
                writeln!(out, "features {}", names.join(" "))
            }
            Decl::Fuel(n) => writeln!(out, "fuel {n}"),
        }
        .unwrap();
    }
    for tx in &s.transactions {
        write!(out, "transaction from {} ", tx.author).unwrap();
        write_block(&mut out, &tx.ops, 0);
        out.push('\n');
    }
    for e in &s.expectations {
        writeln!(out, "expect {e}").unwrap();
    }
    out
}

fn write_quoted(out: &mut String, s: &str) {
    write_string_literal(out, s).unwrap();
}

fn write_block(out: &mut String, ops: &[OpSpec], depth: usize) {
    if ops.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for op in ops {
        out.push_str(&"  ".repeat(depth + 1));
        write_op(out, op, depth + 1);
        out.push('\n');
    }
    out.push_str(&"  ".repeat(depth));
    out.push('}');
}

fn write_addrs(out: &mut String, addrs: &[Address]) {
    let parts: Vec<_> = addrs.iter().map(Address::to_string).collect();
    write!(out, "[{}] ", parts.join(" ")).unwrap();
}

fn write_op(out: &mut String, op: &OpSpec, depth: usize) {
    match op {
        OpSpec::Transfer { amount, dest, call } => {
            write!(out, "transfer {amount} to {dest}").unwrap();
            if let Some((entry, args)) = call {
                let args: Vec<_> = args.iter().map(ToString::to_string).collect();
                write!(out, " call {entry}({})", args.join(", ")).unwrap();
            }
        }
        OpSpec::Create {
            addr,
            code,
            config,
            storage,
            balance,
        } => write!(
            out,
            "create {addr} code {code} config {config} storage {storage} balance {balance}"
        )
        .unwrap(),
        OpSpec::Atomic(ops) => {
            out.push_str("atomic ");
            write_block(out, ops, depth);
        }
        OpSpec::Context(ops) => {
            out.push_str("context ");
            write_block(out, ops, depth);
        }
        OpSpec::Allow(addrs, ops) => {
            out.push_str("allow ");
            write_addrs(out, addrs);
            write_block(out, ops, depth);
        }
        OpSpec::Block(addrs, ops) => {
            out.push_str("block ");
            write_addrs(out, addrs);
            write_block(out, ops, depth);
        }
        OpSpec::EndInteractions => out.push_str("end_interactions"),
    }
}
