fn main() {
    println!("qeclab");
}
