package shop.model;

/**
 * Customer account. Users log in with the account login and password;
 * the login page shows invalid credentials for a wrong password. Unicode
 * characters are allowed in customer names.
 */
public class Customer {
    private final String name;
    private final String address;

    public Customer(String name, String address) {
        this.name = name;
        this.address = address;
    }

    public String name() {
        return name;
    }

    public String address() {
        return address;
    }
}
