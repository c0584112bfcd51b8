package a;

public class Greeter {
    String name;

    String greet() {
        return name;
    }
}
