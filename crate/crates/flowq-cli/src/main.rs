fn main() {
    println!("flowq harness: subcommands arrive with the library modules");
}
