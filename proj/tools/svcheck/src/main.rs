use std::collections::HashMap;
use std::env;
use std::process::exit;
use sv_parser::parse_sv;

fn main() {
    let args: Vec<String> = env::args().collect();
    if args.len() < 2 {
        eprintln!("usage: svcheck <file.sv>...");
        exit(2);
    }
    let defines = HashMap::new();
    let includes: Vec<String> = Vec::new();
    let mut failed = false;
    for path in &args[1..] {
        match parse_sv(path, &defines, &includes, false, false) {
            Ok(_) => println!("{}: ok", path),
            Err(e) => {
                eprintln!("{}: parse error: {}", path, e);
                failed = true;
            }
        }
    }
    exit(if failed { 1 } else { 0 });
}
