package shop.mail;

/**
 * Email template for order confirmation email and customer messages. The
 * confirmation email lists the order lines; every email message uses the
 * customer name in the greeting.
 */
public class EmailTemplate {
    private String confirmationEmailBody;
    private String customerGreeting;

    public String render(String name, String lines) {
        return "Dear " + name + "\n" + lines;
    }
}
