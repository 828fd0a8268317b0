package shop.order;

/**
 * Order cancellation. Cancelling an order marks the order cancelled and
 * restores the stock of every order line. A cancelled order cannot be
 * cancelled twice; cancelling restores inventory stock. The customer
 * receives a confirmation email for the cancelled order; the email message
 * is queued in the mail queue.
 */
public class OrderCancellation {
    private String cancelledOrderStatus;
    private int cancellingOrders;

    public boolean cancel(long id) {
        return id > 0;
    }
}
